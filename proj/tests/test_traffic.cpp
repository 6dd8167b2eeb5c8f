#include <array>

#include "doctest.h"
#include "pcn/snapshot.hpp"
#include "pcn/synthetic.hpp"
#include "pcn/traffic.hpp"
#include "support.hpp"

using namespace pcn;
using pcn::test::make_graph;
using pcn::test::N;

namespace {

// tau = (30, 10, 10, 0) sats * 1000 for s, x, y, lone; w stays outside the
// eligible set
NetworkGraph four_nodes() {
  return make_graph({"s", "x", "y", "lone", "w"},
                    {{"1", "s", "x", 20}, {"2", "s", "y", 20}, {"3", "s", "w", 20}});
}

std::array<double, 4> frequencies(const NetworkGraph& g, Distribution d, int draws) {
  TrafficConfig cfg;
  cfg.distribution = d;
  cfg.eligible = {0, 1, 2, 3};
  EndpointSampler sampler(g, cfg);
  Rng rng = make_rng(17);
  std::array<double, 4> f{};
  for (int i = 0; i < draws; ++i) f[sampler.draw(rng)] += 1.0 / draws;
  return f;
}

}  // namespace

TEST_CASE("uniform endpoints") {
  const auto f = frequencies(four_nodes(), Distribution::Uniform, 200'000);
  for (double x : f) CHECK(x == doctest::Approx(0.25).epsilon(0.015 / 0.25));
}

TEST_CASE("capacity proportional endpoints") {
  auto g = four_nodes();
  REQUIRE(g.tau(N(g, "s")) == 30'000);
  REQUIRE(g.tau(N(g, "x")) == 10'000);
  const auto f = frequencies(g, Distribution::CapacityProportional, 200'000);
  CHECK(f[0] == doctest::Approx(0.6).epsilon(0.015));
  CHECK(f[1] == doctest::Approx(0.2).epsilon(0.015 / 0.2));
  CHECK(f[2] == doctest::Approx(0.2).epsilon(0.015 / 0.2));
  CHECK(f[3] == 0.0);
}

TEST_CASE("eligible set") {
  auto g = four_nodes();
  TrafficConfig cfg;
  cfg.eligible = {N(g, "y")};
  Rng rng = make_rng(1);
  for (int i = 0; i < 20; ++i) CHECK(sample_endpoint(g, cfg, rng) == N(g, "y"));

  cfg.count = 3;
  CHECK_THROWS_AS(run_batch(g, cfg, {}), BatchAborted);

  cfg.eligible = {99};
  CHECK_THROWS_AS(sample_endpoint(g, cfg, rng), TrafficError);
}

TEST_CASE("direct payments earn nobody anything") {
  auto g = make_graph({"a", "b"}, {{"ab", "a", "b", 1'000'000, {10, 10, true}, {10, 10, true}}});
  TrafficConfig cfg;
  cfg.count = 50;
  auto r = run_batch(g, cfg, {});
  CHECK(r.records.size() == 50);
  CHECK(r.revenue.empty());
  CHECK(r.mean_fee() == 0.0);
}

TEST_CASE("revenue goes to the intermediary of a line") {
  auto g = make_graph({"a", "b", "c"}, {{"ab", "a", "b", 1'000'000, {7, 0, true}, {7, 0, true}},
                                        {"bc", "b", "c", 1'000'000, {7, 0, true}, {7, 0, true}}});
  TrafficConfig cfg;
  cfg.count = 300;
  cfg.seed = 4;
  auto r = run_batch(g, cfg, {});
  REQUIRE(r.revenue.size() == 1);
  const auto b = N(g, "b");
  CHECK(r.revenue.count(b) == 1);
  Msat through_b = 0;
  for (const auto& rec : r.records) through_b += rec.path.size() == 2 ? 7 : 0;
  CHECK(r.revenue_of(b) == through_b);
  CHECK(r.total_fees() == through_b);
  CHECK(through_b > 0);
}

TEST_CASE("batch aborts when payments cannot settle") {
  auto g = make_graph({"a", "b", "c", "d"}, {{"ab", "a", "b", 100'000, {5, 0, true}, {5, 0, true}},
                                             {"bc", "b", "c", 100'000, {5, 0, true}, {5, 0, true}}});
  TrafficConfig cfg;
  cfg.count = 20;
  cfg.eligible = {N(g, "a"), N(g, "c"), N(g, "d")};
  RoutingConfig routing;
  routing.fee_cap = 0;
  try {
    run_batch(g, cfg, routing);
    FAIL("expected abort");
  } catch (const BatchAborted& e) {
    CHECK(std::string(e.what()).find("1000 attempts") != std::string::npos);
  }
}

TEST_CASE("batches are reproducible") {
  SyntheticSpec spec;
  spec.nodes = 80;
  auto g1 = generate_synthetic(spec, 2);
  auto g2 = generate_synthetic(spec, 2);
  TrafficConfig cfg;
  cfg.count = 500;
  cfg.seed = 77;
  cfg.distribution = Distribution::CapacityProportional;
  RoutingConfig routing;
  routing.algorithm = Algorithm::GreedyAlpha;
  routing.alpha = 0.01;
  routing.enforce_balances = true;
  auto r1 = run_batch(g1, cfg, routing);
  auto r2 = run_batch(g2, cfg, routing);
  CHECK(r1.revenue == r2.revenue);
  CHECK(r1.attempts == r2.attempts);
  CHECK(export_snapshot(g1) == export_snapshot(g2));

  cfg.seed = 78;
  auto g3 = generate_synthetic(spec, 2);
  CHECK(run_batch(g3, cfg, routing).revenue != r1.revenue);
}

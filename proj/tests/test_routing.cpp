#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "pcn/routing.hpp"
#include "pcn/snapshot.hpp"
#include "pcn/synthetic.hpp"
#include "support.hpp"

using namespace pcn;
using pcn::test::C;
using pcn::test::make_graph;
using pcn::test::N;

namespace {

RoutingConfig fee_only() { return {}; }

RoutingConfig greedy(double alpha) {
  RoutingConfig cfg;
  cfg.algorithm = Algorithm::GreedyAlpha;
  cfg.alpha = alpha;
  return cfg;
}

RoutingConfig pickhardt(double mu) {
  RoutingConfig cfg;
  cfg.algorithm = Algorithm::PickhardtMu;
  cfg.mu = mu;
  return cfg;
}

NetworkGraph random_small_graph(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_dist(3, 8);
  const int n = n_dist(rng);
  const int m = std::uniform_int_distribution<int>(n - 1, 14)(rng);
  std::uniform_int_distribution<int> node(0, n - 1);
  std::uniform_int_distribution<Sat> cap(5'000, 40'000);
  std::uniform_int_distribution<Msat> base(0, 3'000), ppm(0, 2'000);
  std::bernoulli_distribution disabled(0.1);

  NetworkGraph g;
  for (int i = 0; i < n; ++i) g.add_node("n" + std::to_string(i));
  for (int e = 0; e < m; ++e) {
    int a = node(rng), b = node(rng);
    while (b == a) b = node(rng);
    FeePolicy pa{base(rng), ppm(rng), !disabled(rng)};
    FeePolicy pb{base(rng), ppm(rng), !disabled(rng)};
    g.open_channel(static_cast<NodeIndex>(a), static_cast<NodeIndex>(b), cap(rng), Funding::Dual,
                   pa, pb);
  }
  return g;
}

}  // namespace

TEST_CASE("hop fee") {
  CHECK(hop_fee({1000, 1, true}, 10'000) == 1010);
  CHECK(hop_fee({0, 999, true}, 1) == 0);
  CHECK(hop_fee({5, 1500, true}, 3) == 9);

  std::mt19937_64 rng(99);
  std::uniform_int_distribution<Msat> base(0, 1'000'000), ppm(0, 10'000'000);
  std::uniform_int_distribution<Sat> amount(1, 2'100'000'000'000'000);
  for (int i = 0; i < 500; ++i) {
    const FeePolicy p{base(rng), ppm(rng), true};
    const Sat a = amount(rng) / (i % 2 ? 1'000'000 : 1);
    const auto expected = oracle::fee(p.fee_base, p.fee_ppm, a);
    if (expected > std::numeric_limits<Msat>::max()) {
      CHECK_THROWS_AS(hop_fee(p, a), std::overflow_error);
    } else {
      CHECK(oracle::cpp_int(hop_fee(p, a)) == expected);
    }
  }
}

TEST_CASE("edge weight examples") {
  Channel ch;
  ch.id = "x";
  ch.endpoint = {0, 1};
  ch.capacity = 500'000'000;
  ch.policy = {FeePolicy{2000, 0, true}, FeePolicy{0, 0, false}};

  CHECK(*edge_weight(ch, Side::A, greedy(1.0), 10'000) == doctest::Approx(1.1));
  CHECK(*edge_weight(ch, Side::A, greedy(1.0), 10'000, true) == doctest::Approx(1.0));
  CHECK_FALSE(edge_weight(ch, Side::B, greedy(1.0), 10'000));
  CHECK(*edge_weight(ch, Side::A, greedy(0.0), 10'000) ==
        *edge_weight(ch, Side::A, fee_only(), 10'000));

  ch.capacity = 19'999;
  CHECK(*edge_weight(ch, Side::A, pickhardt(0), 10'000) == doctest::Approx(std::log(2.0)));
  CHECK(edge_weight(ch, Side::A, pickhardt(0), 19'999));
  CHECK_FALSE(edge_weight(ch, Side::A, pickhardt(0), 20'000));

  ch.policy[0] = {40'000, 0, true};
  CHECK(*edge_weight(ch, Side::A, fee_only(), 10'000) == doctest::Approx(1.0));
}

TEST_CASE("shortest paths match exhaustive enumeration") {
  std::mt19937_64 rng(2024);
  const RoutingConfig configs[] = {fee_only(), greedy(0.001), greedy(0.1), pickhardt(0),
                                   pickhardt(10)};
  int graphs = 0, compared = 0;
  for (; graphs < 200; ++graphs) {
    auto g = random_small_graph(rng);
    for (const auto& cfg : configs) {
      for (NodeIndex s = 0; s < g.node_count(); ++s) {
        for (NodeIndex t = 0; t < g.node_count(); ++t) {
          if (s == t) continue;
          const auto path = find_path(g, s, t, 10'000, cfg);
          const auto best = oracle::min_path_weight(g, s, t, cfg, 10'000);
          REQUIRE(path.has_value() == best.has_value());
          if (!path) continue;
          const auto cost = oracle::path_cost(g, *path, cfg, 10'000);
          REQUIRE(cost);
          CHECK(*cost == doctest::Approx(*best).epsilon(1e-9));
          ++compared;
        }
      }
    }
  }
  CHECK(compared > 1000);
}

TEST_CASE("parallel channels pick the cheaper one") {
  auto g = make_graph({"a", "b", "c"}, {{"ab", "a", "b", 100'000},
                                        {"bc5", "b", "c", 100'000, {5, 0, true}},
                                        {"bc3", "b", "c", 100'000, {3, 0, true}}});
  auto rec = execute_payment(g, N(g, "a"), N(g, "c"), 10'000, fee_only());
  REQUIRE(rec.ok());
  CHECK(rec.total_fee == 3);
  CHECK(g.channel(rec.path[1].channel).id == "bc3");
}

TEST_CASE("payment along a line") {
  auto g = make_graph({"a", "b", "c"},
                      {{"ab", "a", "b", 100'000}, {"bc", "b", "c", 100'000, {100, 0, true}}});
  auto rec = execute_payment(g, N(g, "a"), N(g, "c"), 10'000, fee_only());
  REQUIRE(rec.ok());
  CHECK(rec.total_fee == 100);
  REQUIRE(rec.hop_fees.size() == 1);
  CHECK(rec.intermediary(g, 0) == N(g, "b"));
  CHECK(rec.path.size() == 2);

  SUBCASE("fee cap") {
    g.set_policy(C(g, "bc"), Side::A, {501, 0, true});
    auto cfg = fee_only();
    cfg.fee_cap = 500;
    CHECK(execute_payment(g, N(g, "a"), N(g, "c"), 10'000, cfg).status ==
          PaymentStatus::FeeCapExceeded);
    g.set_policy(C(g, "bc"), Side::A, {500, 0, true});
    CHECK(execute_payment(g, N(g, "a"), N(g, "c"), 10'000, cfg).ok());
  }
  SUBCASE("no path") {
    g.set_policy(C(g, "bc"), Side::A, {0, 0, false});
    CHECK(execute_payment(g, N(g, "a"), N(g, "c"), 10'000, fee_only()).status ==
          PaymentStatus::NoPath);
  }
}

TEST_CASE("insufficient balance leaves the graph untouched") {
  auto g = make_graph({"a", "b", "c"}, {{"ab", "a", "b", 30'000}, {"bc", "b", "c", 8'000}});
  CHECK(g.channel(C(g, "bc")).balance[0] == 4'000'000);
  auto cfg = fee_only();
  cfg.enforce_balances = true;
  const auto before = export_snapshot(g);
  auto rec = execute_payment(g, N(g, "a"), N(g, "c"), 10'000, cfg);
  CHECK(rec.status == PaymentStatus::InsufficientBalance);
  CHECK(export_snapshot(g) == before);

  auto ok = execute_payment(g, N(g, "a"), N(g, "b"), 10'000, cfg);
  REQUIRE(ok.ok());
  CHECK(g.channel(C(g, "ab")).balance[0] == 5'000'000);
  CHECK(g.channel(C(g, "ab")).balance[1] == 25'000'000);
}

TEST_CASE("tie breaking") {
  SUBCASE("fewer hops first") {
    auto g = make_graph({"a", "b", "d"},
                        {{"zz", "a", "d", 1000}, {"aa", "a", "b", 1000}, {"ab", "b", "d", 1000}});
    auto p = find_path(g, N(g, "a"), N(g, "d"), 10, fee_only());
    REQUIRE(p);
    REQUIRE(p->size() == 1);
    CHECK(g.channel((*p)[0].channel).id == "zz");
  }
  SUBCASE("then smallest channel id sequence") {
    auto g = make_graph({"a", "b", "c", "d"}, {{"m1", "a", "b", 1000},
                                               {"m2", "b", "d", 1000},
                                               {"k9", "c", "d", 1000},
                                               {"k1", "a", "c", 1000}});
    auto p = find_path(g, N(g, "a"), N(g, "d"), 10, fee_only());
    REQUIRE(p);
    REQUIRE(p->size() == 2);
    CHECK(g.channel((*p)[0].channel).id == "k1");
    CHECK(g.channel((*p)[1].channel).id == "k9");
  }
}

TEST_CASE("complete graph routes use at most one intermediary") {
  auto g = make_graph({"a", "b", "c", "d"},
                      {{"1", "a", "b", 1000}, {"2", "a", "c", 1000}, {"3", "a", "d", 1000},
                       {"4", "b", "c", 1000}, {"5", "b", "d", 1000}, {"6", "c", "d", 1000}});
  for (const auto& cfg : {fee_only(), greedy(0.1), pickhardt(1)}) {
    for (NodeIndex s = 0; s < 4; ++s)
      for (NodeIndex t = 0; t < 4; ++t)
        if (s != t) CHECK(find_path(g, s, t, 10, cfg)->size() <= 2);
  }
}

TEST_CASE("route table") {
  SyntheticSpec spec;
  spec.nodes = 120;
  auto g = generate_synthetic(spec, 5);
  const auto cfg = greedy(0.01);
  std::vector<NodeIndex> sources(g.node_count());
  std::iota(sources.begin(), sources.end(), NodeIndex{0});
  auto table = all_pairs_routes(g, sources, cfg, 10'000);

  std::mt19937_64 rng(8);
  std::uniform_int_distribution<NodeIndex> node(0, static_cast<NodeIndex>(g.node_count() - 1));
  for (int i = 0; i < 100; ++i) {
    const auto s = node(rng), t = node(rng);
    if (s == t) continue;
    CHECK(table.lookup(g, s, t) == find_path(g, s, t, 10'000, cfg));
  }

  g.set_policy(0, Side::A, {1, 1, true});
  CHECK_THROWS_AS(table.lookup(g, 0, 1), StaleRouteTable);
}

#include "doctest.h"
#include "json.hpp"
#include "pcn/dynamics.hpp"
#include "pcn/snapshot.hpp"
#include "pcn/synthetic.hpp"

using namespace pcn;

namespace {

NetworkGraph small_graph(std::uint64_t seed = 3) {
  SyntheticSpec spec;
  spec.nodes = 60;
  return generate_synthetic(spec, seed);
}

EvolutionConfig config(MoveKind kind, std::size_t rounds) {
  EvolutionConfig cfg;
  cfg.rounds = rounds;
  cfg.perturbation = kind;
  cfg.traffic.count = 300;
  cfg.routing.algorithm = Algorithm::GreedyAlpha;
  cfg.routing.alpha = 0.001;
  cfg.seed = 12;
  return cfg;
}

}  // namespace

TEST_CASE("evolution is reproducible") {
  for (auto kind : {MoveKind::RandomFee, MoveKind::RandomChannelSingle, MoveKind::RandomChannelDual}) {
    auto g1 = small_graph();
    auto g2 = small_graph();
    const auto cfg = config(kind, 6);
    const auto r1 = run_evolution(g1, cfg);
    const auto r2 = run_evolution(g2, cfg);
    CHECK(r1.size() == 7);
    CHECK(time_series_csv(r1) == time_series_csv(r2));
    CHECK(moves_jsonl(g1, kind, r1) == moves_jsonl(g2, kind, r2));
    CHECK(export_snapshot(g1) == export_snapshot(g2));
  }
}

TEST_CASE("rejecting every move leaves the graph untouched") {
  for (auto kind : {MoveKind::RandomFee, MoveKind::RandomChannelSingle, MoveKind::RandomChannelDual}) {
    auto g = small_graph();
    const auto before = export_snapshot(g);
    auto cfg = config(kind, 4);
    cfg.accept = [](Msat, Msat) { return false; };
    const auto reports = run_evolution(g, cfg);
    CHECK(export_snapshot(g) == before);
    std::size_t applied = 0;
    for (const auto& r : reports) {
      CHECK(r.accepted_count() == 0);
      for (const auto& a : r.actors) applied += a.applied;
      CHECK(r.reverted_count() == static_cast<std::size_t>(std::count_if(
                                      r.actors.begin(), r.actors.end(),
                                      [](const ActorOutcome& a) { return a.applied; })));
    }
    CHECK(applied > 0);
  }
}

TEST_CASE("round accounting") {
  auto g = small_graph();
  const auto cfg = config(MoveKind::RandomFee, 8);
  const auto reports = run_evolution(g, cfg);
  REQUIRE(reports.size() == 9);
  CHECK(reports[0].actors.empty());
  std::map<NodeIndex, Msat> kept;
  for (std::size_t r = 1; r < reports.size(); ++r) {
    CHECK(reports[r].round == r);
    CHECK(reports[r].actors.size() == g.node_count());
    for (const auto& a : reports[r].actors) {
      CHECK(a.accepted == (a.applied && a.revenue_after > a.revenue_before));
      if (kept.count(a.actor)) CHECK(a.revenue_before == kept[a.actor]);
      if (a.accepted || !kept.count(a.actor)) kept[a.actor] = a.accepted ? a.revenue_after : a.revenue_before;
    }
    CHECK(reports[r].accepted_count() + reports[r].reverted_count() <= reports[r].actors.size());
  }
}

TEST_CASE("capacity bookkeeping across rounds") {
  SUBCASE("fee moves never touch capacity") {
    auto g = small_graph();
    const auto total = g.total_capacity();
    const auto channels = g.channel_count();
    run_evolution(g, config(MoveKind::RandomFee, 5));
    CHECK(g.total_capacity() == total);
    CHECK(g.channel_count() == channels);
  }
  SUBCASE("single funded churn keeps total capacity") {
    auto g = small_graph();
    const auto total = g.total_capacity();
    run_evolution(g, config(MoveKind::RandomChannelSingle, 5));
    CHECK(g.total_capacity() == total);
  }
}

TEST_CASE("degree histograms") {
  auto g = small_graph();
  auto cfg = config(MoveKind::RandomChannelSingle, 10);
  cfg.record_degree_every = 5;
  const auto reports = run_evolution(g, cfg);
  std::size_t recorded = 0;
  for (const auto& r : reports) {
    if (!r.degree_histogram) continue;
    ++recorded;
    CHECK(r.round % 5 == 0);
    std::size_t total = 0;
    for (const auto& [deg, count] : *r.degree_histogram) total += count;
    CHECK(total == g.node_count());
  }
  CHECK(recorded == 3);
  const auto csv = degree_histogram_csv(reports);
  CHECK(csv.rfind("round,degree,count\n", 0) == 0);
}

TEST_CASE("empty actor subset") {
  auto g = small_graph();
  const auto before = export_snapshot(g);
  auto cfg = config(MoveKind::RandomChannelDual, 3);
  cfg.subset_size = 0;
  const auto reports = run_evolution(g, cfg);
  for (const auto& r : reports) CHECK(r.actors.empty());
  CHECK(export_snapshot(g) == before);
  CHECK(time_series_csv(reports).find(",0,0\n") != std::string::npos);
}

TEST_CASE("moves log") {
  auto g = small_graph();
  auto cfg = config(MoveKind::RandomFee, 2);
  cfg.subset_size = 5;
  const auto reports = run_evolution(g, cfg);
  const auto text = moves_jsonl(g, cfg.perturbation, reports);
  std::size_t lines = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    auto obj = nlohmann::json::parse(text.substr(start, end - start));
    CHECK(obj["kind"] == "random_fee");
    CHECK(obj.contains("revenue_before_msat"));
    ++lines;
    start = end + 1;
  }
  CHECK(lines == 10);
}

TEST_CASE("short term perturbation") {
  auto g = small_graph();
  ShortTermConfig cfg;
  cfg.subset_size = 10;
  TrafficConfig traffic;
  traffic.count = 400;
  RoutingConfig routing;
  Rng rng = make_rng(5);
  const auto total = g.total_capacity();
  const auto result = run_short_term(g, cfg, traffic, routing, rng);
  CHECK(result.subset.size() == 10);
  CHECK(result.moves.size() == 10);
  CHECK(result.before.nodes.size() == 10);
  CHECK(result.after.nodes.size() == 10);
  CHECK(g.total_capacity() == total);
  for (std::size_t i = 1; i < result.subset.size(); ++i) {
    CHECK(g.tau(result.subset[i - 1]) >= g.tau(result.subset[i]));
  }
}

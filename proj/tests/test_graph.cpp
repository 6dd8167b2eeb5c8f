#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "pcn/snapshot.hpp"
#include "pcn/synthetic.hpp"
#include "support.hpp"

using namespace pcn;
using pcn::test::C;
using pcn::test::make_graph;
using pcn::test::N;

namespace {

void check_conservation(const NetworkGraph& g) {
  for (ChannelIndex c : g.live_channels()) {
    const auto& ch = g.channel(c);
    CHECK(ch.balance[0] + ch.balance[1] == ch.capacity * kMsatPerSat);
    CHECK(ch.balance[0] >= 0);
    CHECK(ch.balance[1] >= 0);
  }
}

}  // namespace

TEST_CASE("channel invariants on insert") {
  NetworkGraph g;
  g.add_node("a");
  g.add_node("b");
  const auto a = N(g, "a"), b = N(g, "b");

  SUBCASE("odd msat remainder goes to endpoint a") {
    auto c = g.open_channel(a, b, 1, Funding::Dual, {}, {});
    CHECK(g.channel(c).balance[0] == 500);
    CHECK(g.channel(c).balance[1] == 500);
  }
  SUBCASE("single funded") {
    auto c = g.open_channel(a, b, 10, Funding::SingleFundedByA, {}, {});
    CHECK(g.channel(c).balance[0] == 10'000);
    CHECK(g.channel(c).balance[1] == 0);
  }
  SUBCASE("self channel and zero capacity rejected") {
    CHECK_THROWS_AS(g.open_channel(a, a, 10, Funding::Dual, {}, {}), GraphError);
    CHECK_THROWS_AS(g.open_channel(a, b, 0, Funding::Dual, {}, {}), GraphError);
  }
  SUBCASE("parallel channels are allowed") {
    g.open_channel(a, b, 10, Funding::Dual, {}, {});
    g.open_channel(a, b, 20, Funding::Dual, {}, {});
    CHECK(g.degree(a) == 2);
    CHECK(g.channel_count() == 2);
  }
}

TEST_CASE("tau and node stats") {
  auto g = make_graph({"a", "b", "c"}, {{"x", "a", "b", 100}, {"y", "a", "c", 300}});
  const auto s = g.stats(N(g, "a"));
  CHECK(s.tau == 200'000);
  CHECK(s.capacity_sum == 400);
  CHECK(s.degree == 2);
  CHECK(s.tau == s.capacity_sum * 500);
}

TEST_CASE("top_k_by_capacity") {
  auto g = make_graph({"p", "q", "r", "s"},
                      {{"1", "p", "s", 60}, {"2", "q", "s", 20}, {"3", "r", "s", 40}});
  // tau: p=30000, q=10000, r=20000, s=60000
  auto top2 = top_k_by_capacity(g, 2);
  REQUIRE(top2.size() == 2);
  CHECK(g.node_id(top2[0]) == "s");
  CHECK(g.node_id(top2[1]) == "p");

  auto all = top_k_by_capacity(g, 4);
  CHECK(all.size() == 4);
  CHECK(std::equal(top2.begin(), top2.end(), all.begin()));
  CHECK_THROWS_AS(top_k_by_capacity(g, 5), GraphError);

  SUBCASE("ties broken by node id") {
    auto t = make_graph({"m", "k", "z"}, {{"1", "m", "z", 10}, {"2", "k", "z", 10}});
    auto order = top_k_by_capacity(t, 3);
    CHECK(t.node_id(order[0]) == "z");
    CHECK(t.node_id(order[1]) == "k");
    CHECK(t.node_id(order[2]) == "m");
  }
}

TEST_CASE("close channel") {
  auto g = make_graph({"a", "b"}, {{"x", "a", "b", 100}, {"y", "a", "b", 50}});
  const auto gen = g.generation();
  auto removed = g.close_channel("x");
  CHECK(removed.capacity == 100);
  CHECK(g.generation() > gen);
  CHECK(g.degree(N(g, "a")) == 1);
  CHECK_FALSE(g.find_channel("x"));
  CHECK_THROWS(g.close_channel("x"));
  g.close_channel("y");
  CHECK(g.degree(N(g, "a")) == 0);
  CHECK(g.degree(N(g, "b")) == 0);
}

TEST_CASE("restore puts a channel back byte-identically") {
  auto g = make_graph({"a", "b", "c"}, {{"x", "a", "b", 100}, {"y", "b", "c", 50}, {"z", "a", "c", 70}});
  const auto before = export_snapshot(g);
  const auto slot = C(g, "y");
  auto saved = g.close_channel(slot);
  CHECK(export_snapshot(g) != before);
  g.restore_channel(slot, saved);
  CHECK(export_snapshot(g) == before);
}

TEST_CASE("generation increases on every mutation") {
  auto g = make_graph({"a", "b", "c"}, {{"x", "a", "b", 100}, {"y", "b", "c", 60}});
  auto last = g.generation();
  auto bump = [&] {
    CHECK(g.generation() > last);
    last = g.generation();
  };
  g.set_policy(C(g, "x"), Side::A, {5, 1, true});
  bump();
  g.adjust_capacity(C(g, "x"), Side::B, 10);
  bump();
  auto c = g.open_channel(N(g, "a"), N(g, "c"), 40, Funding::Dual, {}, {});
  bump();
  auto closed = g.close_channel(c);
  bump();
  g.redistribute_on_close(closed, N(g, "c"));
  bump();
}

TEST_CASE("redistribute_on_close") {
  SUBCASE("600 sats over 3 remaining channels") {
    auto g = make_graph({"u", "v", "w1", "w2", "w3"}, {{"uv", "u", "v", 600},
                                                       {"a", "v", "w1", 1000},
                                                       {"b", "v", "w2", 1000},
                                                       {"c", "v", "w3", 1000}});
    const auto total = g.total_capacity();
    auto closed = g.close_channel("uv");
    auto r = g.redistribute_on_close(closed, N(g, "v"));
    CHECK(r.per_channel == 100);
    CHECK(r.released == 300);
    for (const char* id : {"a", "b", "c"}) {
      const auto& ch = g.channel(C(g, id));
      CHECK(ch.capacity == 1100);
      CHECK(ch.balance[idx(ch.side_of(N(g, "v")))] == 600'000);
    }
    CHECK(g.total_capacity() + r.released == total);
    check_conservation(g);
  }
  SUBCASE("floor division") {
    auto g = make_graph({"u", "v", "w1", "w2", "w3"},
                        {{"uv", "u", "v", 7}, {"a", "v", "w1", 10}, {"b", "v", "w2", 10}, {"c", "v", "w3", 10}});
    auto closed = g.close_channel("uv");
    auto r = g.redistribute_on_close(closed, N(g, "v"));
    CHECK(r.per_channel == 1);
    CHECK(r.released == 4);
  }
  SUBCASE("survivor without channels") {
    auto g = make_graph({"u", "v"}, {{"uv", "u", "v", 600}});
    auto closed = g.close_channel("uv");
    CHECK_THROWS_AS(g.redistribute_on_close(closed, N(g, "v")), GraphError);
  }
  SUBCASE("single-funded churn conserves capacity up to the remainder") {
    auto g = make_graph({"u", "v", "w1", "w2", "z"},
                        {{"uv", "u", "v", 601}, {"a", "v", "w1", 10}, {"b", "v", "w2", 10}, {"c", "z", "w1", 10}});
    const auto total = g.total_capacity();
    auto closed = g.close_channel("uv");
    auto r = g.redistribute_on_close(closed, N(g, "v"));
    g.open_channel(N(g, "u"), N(g, "z"), r.released, Funding::SingleFundedByA, {}, {});
    CHECK(g.total_capacity() == total);
    check_conservation(g);
  }
}

TEST_CASE("synthetic generator") {
  SyntheticSpec spec;
  spec.nodes = 5;
  spec.m = 1;
  auto g1 = generate_synthetic(spec, 7);
  auto g2 = generate_synthetic(spec, 7);
  CHECK(export_snapshot(g1) == export_snapshot(g2));
  CHECK(g1.channel_count() == 4);

  spec.nodes = 2;
  spec.m = 2;
  CHECK_THROWS_AS(generate_synthetic(spec, 1), Error);

  SUBCASE("connected") {
    SyntheticSpec s;
    s.nodes = 300;
    auto g = generate_synthetic(s, 3);
    std::vector<char> seen(g.node_count(), 0);
    std::vector<NodeIndex> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      for (auto c : g.incident(u)) {
        auto v = g.channel(c).other(u);
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    CHECK(std::count(seen.begin(), seen.end(), 1) == 300);
    check_conservation(g);
  }
}

namespace {

// Reference preferential attachment: cumulative-degree roulette wheel.
std::vector<std::size_t> reference_ba_degrees(std::size_t n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> deg(n, 0);
  for (std::size_t i = 0; i <= m; ++i) deg[i] = m;
  for (std::size_t v = m + 1; v < n; ++v) {
    std::vector<std::size_t> picked;
    while (picked.size() < m) {
      const std::size_t total = std::accumulate(deg.begin(), deg.begin() + v, std::size_t{0});
      std::size_t r = std::uniform_int_distribution<std::size_t>(0, total - 1)(rng);
      std::size_t t = 0;
      while (r >= deg[t]) r -= deg[t++];
      if (std::find(picked.begin(), picked.end(), t) == picked.end()) picked.push_back(t);
    }
    for (auto t : picked) ++deg[t];
    deg[v] = m;
  }
  return deg;
}

double max_over_median(std::vector<std::size_t> d) {
  std::sort(d.begin(), d.end());
  return static_cast<double>(d.back()) / static_cast<double>(d[d.size() / 2]);
}

}  // namespace

TEST_CASE("synthetic degree distribution is heavy tailed like a reference generator") {
  SyntheticSpec spec;
  spec.nodes = 1000;
  spec.m = 2;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto g = generate_synthetic(spec, seed);
    std::vector<std::size_t> deg;
    for (NodeIndex n = 0; n < g.node_count(); ++n) deg.push_back(g.degree(n));
    const double ours = max_over_median(deg);
    const double ref = max_over_median(reference_ba_degrees(1000, 2, seed));
    CHECK(ours > 10.0);
    CHECK(ref > 10.0);
    CHECK(ours / ref == doctest::Approx(1.0).epsilon(0.6));
  }
}

#pragma once

#include <cstdint>
#include <vector>

#include "pcn/graph.hpp"
#include "pcn/random.hpp"

namespace pcn {

/// Integer-valued sampling distribution used for synthetic capacities and
/// fees. `zero_prob` adds a point mass at zero on top of any kind.
struct SamplerSpec {
  enum class Kind { Constant, Uniform, LogNormal, Choice };

  Kind kind = Kind::Constant;
  double value = 0;             // Constant
  double min = 0, max = 0;      // Uniform range; clamp bounds for LogNormal
  double median = 1, sigma = 0; // LogNormal
  std::vector<double> values;   // Choice
  std::vector<double> weights;  // Choice, empty = equal weights
  double zero_prob = 0;

  std::int64_t sample(Rng& rng) const;
  void validate(const char* what) const;

  static SamplerSpec constant(double v);
  static SamplerSpec uniform(double lo, double hi);
  static SamplerSpec lognormal(double median, double sigma, double lo, double hi);
};

struct FeeSamplerSpec {
  // Heavy-tailed with a point mass at zero; a 10,000-sat hop costs about
  // 200 msat at the medians.
  SamplerSpec base = with_zero(SamplerSpec::lognormal(100, 1.5, 0, 5'000), 0.3);
  SamplerSpec ppm = with_zero(SamplerSpec::lognormal(10, 1.5, 0, 5'000), 0.3);

  static SamplerSpec with_zero(SamplerSpec s, double p) {
    s.zero_prob = p;
    return s;
  }
};

struct SyntheticSpec {
  std::size_t nodes = 100;
  std::size_t m = 2;
  SamplerSpec capacity = SamplerSpec::lognormal(2'000'000, 1.0, 20'000, 500'000'000);
  FeeSamplerSpec fees;
  // Channel capacity is multiplied by (sqrt(deg_a * deg_b) / mean_degree)^hub_capacity_exponent.
  double hub_capacity_exponent = 0;
};

/// Preferential-attachment multigraph: an (m+1)-clique seed, then every new
/// node attaches to m distinct existing nodes with probability proportional
/// to degree. Fully determined by (spec, seed).
NetworkGraph generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace pcn

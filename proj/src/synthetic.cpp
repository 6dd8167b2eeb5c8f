#include "pcn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pcn {

SamplerSpec SamplerSpec::constant(double v) {
  SamplerSpec s;
  s.kind = Kind::Constant;
  s.value = v;
  return s;
}

SamplerSpec SamplerSpec::uniform(double lo, double hi) {
  SamplerSpec s;
  s.kind = Kind::Uniform;
  s.min = lo;
  s.max = hi;
  return s;
}

SamplerSpec SamplerSpec::lognormal(double median, double sigma, double lo, double hi) {
  SamplerSpec s;
  s.kind = Kind::LogNormal;
  s.median = median;
  s.sigma = sigma;
  s.min = lo;
  s.max = hi;
  return s;
}

void SamplerSpec::validate(const char* what) const {
  auto fail = [&](const std::string& msg) { throw Error(std::string(what) + ": " + msg); };
  if (zero_prob < 0 || zero_prob > 1) fail("zero_prob must lie in [0, 1]");
  switch (kind) {
    case Kind::Constant:
      if (value < 0) fail("value must be non-negative");
      break;
    case Kind::Uniform:
      if (min < 0 || max < min) fail("uniform needs 0 <= min <= max");
      break;
    case Kind::LogNormal:
      if (median <= 0 || sigma < 0) fail("lognormal needs median > 0 and sigma >= 0");
      if (min < 0 || max < min) fail("lognormal clamp needs 0 <= min <= max");
      break;
    case Kind::Choice:
      if (values.empty()) fail("choice needs at least one value");
      if (!weights.empty() && weights.size() != values.size()) fail("weights/values size mismatch");
      for (double v : values) {
        if (v < 0) fail("choice values must be non-negative");
      }
      break;
  }
}

std::int64_t SamplerSpec::sample(Rng& rng) const {
  if (zero_prob > 0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < zero_prob) {
    return 0;
  }
  double x = 0;
  switch (kind) {
    case Kind::Constant:
      x = value;
      break;
    case Kind::Uniform:
      return std::uniform_int_distribution<std::int64_t>(static_cast<std::int64_t>(std::ceil(min)),
                                                          static_cast<std::int64_t>(std::floor(max)))(rng);
    case Kind::LogNormal:
      x = std::clamp(std::lognormal_distribution<double>(std::log(median), sigma)(rng), min, max);
      break;
    case Kind::Choice:
      if (weights.empty()) {
        x = values[uniform_index(rng, values.size())];
      } else {
        x = values[std::discrete_distribution<std::size_t>(weights.begin(), weights.end())(rng)];
      }
      break;
  }
  return static_cast<std::int64_t>(std::llround(x));
}

NetworkGraph generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.m < 1) throw Error("synthetic graph: m must be at least 1");
  if (spec.nodes < spec.m + 1) {
    throw Error("synthetic graph: need n >= m + 1 (n=" + std::to_string(spec.nodes) +
                ", m=" + std::to_string(spec.m) + ")");
  }
  spec.capacity.validate("capacity sampler");
  spec.fees.base.validate("base fee sampler");
  spec.fees.ppm.validate("fee rate sampler");

  Rng rng = make_rng(seed, {0x5e17});
  const std::size_t n = spec.nodes;

  // Topology first so the capacity pass can look at final degrees.
  std::vector<std::pair<NodeIndex, NodeIndex>> links;
  std::vector<NodeIndex> ends;  // one entry per channel endpoint
  for (NodeIndex i = 0; i <= spec.m; ++i) {
    for (NodeIndex j = i + 1; j <= spec.m; ++j) {
      links.emplace_back(i, j);
      ends.push_back(i);
      ends.push_back(j);
    }
  }
  std::vector<NodeIndex> picked;
  for (auto v = static_cast<NodeIndex>(spec.m + 1); v < n; ++v) {
    picked.clear();
    while (picked.size() < spec.m) {
      NodeIndex t = ends[uniform_index(rng, ends.size())];
      if (std::find(picked.begin(), picked.end(), t) == picked.end()) picked.push_back(t);
    }
    for (NodeIndex t : picked) {
      links.emplace_back(t, v);
      ends.push_back(t);
      ends.push_back(v);
    }
  }

  std::vector<std::size_t> degree(n, 0);
  for (auto [a, b] : links) {
    ++degree[a];
    ++degree[b];
  }
  const double mean_degree = 2.0 * static_cast<double>(links.size()) / static_cast<double>(n);

  const std::size_t width = std::to_string(n - 1).size();
  auto padded = [](char prefix, std::size_t i, std::size_t w) {
    std::string digits = std::to_string(i);
    return std::string(1, prefix) + std::string(w - std::min(w, digits.size()), '0') + digits;
  };

  NetworkGraph g;
  for (std::size_t i = 0; i < n; ++i) g.add_node(padded('n', i, width));

  const std::size_t cwidth = std::to_string(links.size() == 0 ? 0 : links.size() - 1).size();
  for (std::size_t k = 0; k < links.size(); ++k) {
    auto [a, b] = links[k];
    double cap = static_cast<double>(std::max<std::int64_t>(1, spec.capacity.sample(rng)));
    if (spec.hub_capacity_exponent != 0) {
      const double hub = std::sqrt(static_cast<double>(degree[a] * degree[b])) / mean_degree;
      cap *= std::pow(hub, spec.hub_capacity_exponent);
    }
    Channel ch;
    ch.id = padded('c', k, cwidth);
    ch.endpoint = {a, b};
    ch.capacity = std::max<Sat>(1, static_cast<Sat>(std::llround(cap)));
    const Msat total = ch.capacity * kMsatPerSat;
    ch.balance[1] = total / 2;
    ch.balance[0] = total - ch.balance[1];
    for (auto& p : ch.policy) {
      p.fee_base = spec.fees.base.sample(rng);
      p.fee_ppm = spec.fees.ppm.sample(rng);
      p.enabled = true;
    }
    g.add_channel(std::move(ch));
  }
  return g;
}

}  // namespace pcn

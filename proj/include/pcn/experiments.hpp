#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pcn/dynamics.hpp"
#include "pcn/strategies.hpp"
#include "pcn/synthetic.hpp"
#include "pcn/traffic.hpp"

namespace pcn {

/// Invalid experiment spec. The message starts with the offending field
/// path, e.g. "routing.alpha[1]: must be >= 0".
class SpecError : public Error {
 public:
  using Error::Error;
};

enum class Experiment { Centralization, Correlation, Replication, Evolution, ShortTerm };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);

struct SnapshotSource {
  std::filesystem::path path;
};
using GraphSource = std::variant<SnapshotSource, SyntheticSpec>;

struct ReplicationSettings {
  std::size_t actors = 5;
  std::size_t targets = 10;
  ReplicationMode mode = ReplicationMode::HighestRatio;
  ReplicationParams params;
};

struct EvolutionSettings {
  std::size_t rounds = 1000;
  MoveKind perturbation = MoveKind::RandomFee;
  std::optional<std::size_t> random_subset;
  std::size_t record_degree_every = 0;
  double fee_scale = 50;
  Msat fee_limit = 250;
  Msat fee_cap = 500;
};

struct ShortTermSettings {
  std::size_t subset_size = 100;
  MoveKind perturbation = MoveKind::RandomFee;
  double fee_scale = 50;
  Msat fee_limit = 250;
};

struct ExperimentSpec {
  Experiment experiment = Experiment::Centralization;
  std::uint64_t seed = 0;
  GraphSource graph = SyntheticSpec{};
  std::size_t top_k = 1000;  // analysis set: top_k nodes by tau (capped at |V|)
  std::size_t bucket_size = 200;

  std::vector<Distribution> distributions{Distribution::Uniform};
  Sat amount = 10'000;
  std::size_t count = 10'000;

  RoutingConfig routing;            // alpha / mu overwritten per sweep value
  std::vector<double> parameters;   // the alpha or mu sweep; ignored for fee_only
  std::optional<double> bc_mu;      // bc_combined mu when routing is not pickhardt

  ReplicationSettings replication;
  EvolutionSettings evolution;
  ShortTermSettings short_term;

  std::optional<std::filesystem::path> output;
  std::string sha256;  // of the spec document as read
};

/// Command-line values that take precedence over the document.
struct SpecOverrides {
  std::optional<Experiment> experiment;  // must agree with the document's, if both are given
  std::optional<std::uint64_t> seed;
};

/// Parses and validates a spec document. Relative paths resolve against
/// base_dir. The seed must come from the document or the overrides.
ExperimentSpec parse_spec(const std::string& text, const std::filesystem::path& base_dir,
                          const SpecOverrides& overrides = {});
ExperimentSpec load_spec(const std::filesystem::path& path, const SpecOverrides& overrides = {});

std::string sha256_hex(const std::string& data);

NetworkGraph build_graph(const ExperimentSpec& spec);

struct OutputFile {
  std::string name;
  std::string content;
};

std::vector<OutputFile> cmd_centralization(const ExperimentSpec& spec);
std::vector<OutputFile> cmd_correlation(const ExperimentSpec& spec);
std::vector<OutputFile> cmd_replication(const ExperimentSpec& spec);
std::vector<OutputFile> cmd_evolution(const ExperimentSpec& spec);
std::vector<OutputFile> cmd_short_term(const ExperimentSpec& spec);

std::vector<OutputFile> run_experiment(const ExperimentSpec& spec);

void write_outputs(const std::filesystem::path& dir, const std::vector<OutputFile>& files);

}  // namespace pcn

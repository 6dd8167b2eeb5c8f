#include <cstdio>
#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "pcn/experiments.hpp"
#include "pcn/snapshot.hpp"

namespace {

constexpr int kSpecInvalid = 2;
constexpr int kRuntimeAbort = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Payment channel network fee and routing simulator"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;

  const std::pair<const char*, const char*> commands[] = {
      {"centralization", "Revenue/capacity ratios per capacity bucket"},
      {"correlation", "Spearman correlation of ratio with centrality measures"},
      {"replication", "Revenue before and after replicating better-placed nodes"},
      {"evolution", "Repeated perturb/accept/revert rounds"},
      {"short_term", "One random perturbation of a node subset, same traffic"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--spec", spec_path, "Experiment spec (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory (default: spec output or ./out)");
    sub->add_option("--seed", seed, "Override the spec seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kSpecInvalid;
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  try {
    pcn::SpecOverrides overrides;
    overrides.experiment = pcn::experiment_from_string(experiment);
    overrides.seed = seed;
    const auto spec = pcn::load_spec(spec_path, overrides);
    const std::filesystem::path dir =
        !out_dir.empty() ? std::filesystem::path(out_dir) : spec.output.value_or("out");
    const auto files = pcn::run_experiment(spec);
    pcn::write_outputs(dir, files);
    for (const auto& f : files) std::cout << (dir / f.name).string() << '\n';
    return 0;
  } catch (const pcn::SpecError& e) {
    std::cerr << "pcn-sim: invalid spec: " << e.what() << '\n';
    return kSpecInvalid;
  } catch (const pcn::SnapshotError& e) {
    std::cerr << "pcn-sim: invalid snapshot: " << e.what() << '\n';
    return kSpecInvalid;
  } catch (const std::exception& e) {
    std::cerr << "pcn-sim: " << experiment << " aborted: " << e.what() << '\n';
    return kRuntimeAbort;
  }
}

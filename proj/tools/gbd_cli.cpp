// Command-line front end: run and validate experiment files, query oracles.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gbd/experiment.hpp"

namespace {

using gbd::experiment::Overrides;
using gbd::experiment::SpecError;

constexpr int kExitSpecError = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
  std::string spec;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> algorithm;
  std::optional<double> epsilon;
  std::optional<std::string> out_dir;
  bool no_wallclock = false;

  Overrides overrides() const {
    Overrides o;
    o.seed = seed;
    o.algorithm = algorithm;
    o.epsilon = epsilon;
    if (out_dir) o.output_dir = *out_dir;
    o.no_wallclock = no_wallclock;
    return o;
  }
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--spec", f.spec, "experiment file (JSON)")->required();
  cmd->add_option("--seed", f.seed, "run a single seed instead of the file's seed list");
  cmd->add_option("--algorithm", f.algorithm, "alg1, alg2 or both");
  cmd->add_option("--epsilon", f.epsilon, "outer stopping threshold on the sum-rate increment");
  cmd->add_option("--out-dir", f.out_dir, "output directory");
  cmd->add_flag("--no-wallclock", f.no_wallclock, "write zeros in the wallclock_ms column");
}

int cmd_validate(const CommonFlags& f) {
  const auto spec = gbd::experiment::load_spec(f.spec, f.overrides());
  std::cout << "OK\n" << gbd::experiment::to_json(spec).dump(2) << "\n";
  return 0;
}

int cmd_run(const CommonFlags& f, int jobs) {
  const auto spec = gbd::experiment::load_spec(f.spec, f.overrides());
  const auto out = gbd::experiment::execute(spec, jobs);
  gbd::experiment::write_outputs(spec, out);
  for (const auto& run : out.runs) {
    const auto& best = run.result.best_run();
    std::cout << run.run_id << ": weighted sum rate " << best.weighted_sum_rate << " bits, " << best.iterations
              << " outer iterations" << (best.converged ? "" : " (not converged)") << "\n";
  }
  std::cout << "outputs written to " << spec.output_dir.string() << "\n";
  return 0;
}

int cmd_oracle(const CommonFlags& f, const std::string& kind, int grid_points) {
  const auto spec = gbd::experiment::load_spec(f.spec, f.overrides());
  const auto& config = spec.network;
  nlohmann::json result = nlohmann::json::array();
  for (std::uint64_t seed : spec.seeds) {
    const auto channels = gbd::generate_channels(config, seed);
    std::string chosen = kind;
    if (chosen == "auto") chosen = config.total_users() == 1 ? "waterfill" : "grid";
    nlohmann::json r{{"seed", seed}, {"kind", chosen}};
    if (chosen == "waterfill") {
      if (config.total_users() != 1) throw SpecError("oracle: water-filling needs a single cell with one user");
      const auto wf = gbd::water_filling<double>(channels(0, 0, 0), config.power[0], config.noise_variance);
      r["capacity_bits"] = wf.capacity;
      r["powers"] = std::vector<double>(wf.powers.data(), wf.powers.data() + wf.powers.size());
    } else if (chosen == "grid") {
      gbd::GridResult<double> g;
      try {
        g = gbd::grid_search_siso(config, channels, grid_points);
      } catch (const std::invalid_argument& e) {
        throw SpecError(std::string("oracle: ") + e.what());
      }
      r["weighted_sum_rate_bits"] = g.weighted_sum_rate;
      r["powers"] = g.powers;
    } else {
      throw SpecError("oracle: --kind must be auto, grid or waterfill");
    }
    result.push_back(r);
  }
  std::cout << result.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multicell MIMO weighted sum-rate optimization by generalized Benders decomposition"};
  app.require_subcommand(1);

  CommonFlags run_flags, validate_flags, oracle_flags;
  int jobs = 1;
  std::string kind = "auto";
  int grid_points = 200;

  auto* run = app.add_subcommand("run", "execute an experiment and write summary/trace files");
  add_common(run, run_flags);
  run->add_option("--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "check an experiment file and print resolved defaults");
  add_common(validate, validate_flags);

  auto* oracle = app.add_subcommand("oracle", "global grid search (SISO) or water-filling (single link)");
  add_common(oracle, oracle_flags);
  oracle->add_option("--kind", kind, "auto, grid or waterfill");
  oracle->add_option("--grid-points", grid_points, "grid levels per user")->check(CLI::Range(2, 100000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitSpecError;
  }

  try {
    if (*run) return cmd_run(run_flags, jobs);
    if (*validate) return cmd_validate(validate_flags);
    if (*oracle) return cmd_oracle(oracle_flags, kind, grid_points);
  } catch (const SpecError& e) {
    std::cerr << "invalid spec: " << e.what() << "\n";
    return kExitSpecError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}

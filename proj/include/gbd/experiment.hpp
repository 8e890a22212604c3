#ifndef GBD_EXPERIMENT_HPP
#define GBD_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gbd/benders.hpp"

namespace gbd::experiment {

inline constexpr int kSchemaVersion = 1;

/// Raised for malformed or inconsistent experiment files; maps to exit code 2.
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BoundarySpec {
  std::vector<double> lambda1;  // weight of user one; user two gets 1 - lambda1
  int cloud_samples = 0;
};

/// Resolved experiment description.
struct ExperimentSpec {
  std::string scenario;
  NetworkConfig<double> network;
  std::vector<Algorithm> algorithms;
  OuterSettings settings;
  int n_starts = 1;
  std::vector<std::uint64_t> seeds;
  std::optional<BoundarySpec> boundary;
  bool record_wallclock = true;
  std::filesystem::path output_dir = "out";
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> algorithm;
  std::optional<double> epsilon;
  std::optional<std::filesystem::path> output_dir;
  bool no_wallclock = false;
};

/// Parses and validates a spec document. Throws SpecError naming the field.
ExperimentSpec parse_spec(const nlohmann::json& doc, const Overrides& overrides = {});
ExperimentSpec load_spec(const std::filesystem::path& path, const Overrides& overrides = {});

/// Fully resolved spec, suitable for echoing into the run summary.
nlohmann::json to_json(const ExperimentSpec& spec);

struct RunRecord {
  std::string run_id;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::alg1;
  std::optional<double> lambda1;
  MultiStartResult<double> result;
};

struct CloudSample {
  std::uint64_t seed = 0;
  double r1 = 0;
  double r2 = 0;
};

struct ExperimentOutput {
  std::vector<RunRecord> runs;
  std::vector<CloudSample> cloud;
};

/// Executes every run of the spec with up to `jobs` concurrent runs.
ExperimentOutput execute(const ExperimentSpec& spec, int jobs = 1);

/// Trace CSV: run_id,algorithm,outer_iter,lower_bound_bits,master_value_bits,wallclock_ms
std::string trace_csv(const ExperimentSpec& spec, const ExperimentOutput& out);
/// Boundary CSV: run_id,seed,algorithm,lambda1,R1,R2
std::string boundary_csv(const ExperimentOutput& out);
/// Cloud CSV: seed,R1,R2
std::string cloud_csv(const ExperimentOutput& out);
nlohmann::json summary_json(const ExperimentSpec& spec, const ExperimentOutput& out);

/// Writes summary.json, trace.csv and, for boundary runs, boundary.csv and cloud.csv.
void write_outputs(const ExperimentSpec& spec, const ExperimentOutput& out);

/// Rows of a CSV file split on commas; the header row is included.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace gbd::experiment

#endif  // GBD_EXPERIMENT_HPP

#include "gbd/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace gbd::experiment {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw SpecError(field + ": " + what);
}

template <typename T>
T get_as(const json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    fail(field, "has the wrong type");
  }
}

/// Scalar broadcast to every cell, or an explicit per-cell list.
template <typename T>
std::vector<T> per_cell(const json& node, const std::string& field, int cells) {
  if (node.is_array()) {
    if (int(node.size()) != cells) fail(field, "expected " + std::to_string(cells) + " entries");
    std::vector<T> out;
    for (const auto& v : node) out.push_back(get_as<T>(v, field));
    return out;
  }
  return std::vector<T>(std::size_t(cells), get_as<T>(node, field));
}

/// Scalar, per-cell list, or per-cell list of per-user lists.
template <typename T>
std::vector<std::vector<T>> per_user(const json& node, const std::string& field, const std::vector<int>& users) {
  const int cells = int(users.size());
  std::vector<std::vector<T>> out(static_cast<std::size_t>(cells));
  if (!node.is_array()) {
    const T v = get_as<T>(node, field);
    for (int k = 0; k < cells; ++k) out[std::size_t(k)].assign(std::size_t(users[std::size_t(k)]), v);
    return out;
  }
  if (int(node.size()) != cells) fail(field, "expected " + std::to_string(cells) + " entries");
  for (int k = 0; k < cells; ++k) {
    const auto& c = node[std::size_t(k)];
    if (c.is_array()) {
      if (int(c.size()) != users[std::size_t(k)]) fail(field, "cell " + std::to_string(k) + " has the wrong user count");
      for (const auto& v : c) out[std::size_t(k)].push_back(get_as<T>(v, field));
    } else {
      out[std::size_t(k)].assign(std::size_t(users[std::size_t(k)]), get_as<T>(c, field));
    }
  }
  return out;
}

void check_known_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) fail(where + it.key(), "unknown field");
  }
}

NetworkConfig<double> parse_network(const json& n) {
  if (!n.is_object()) fail("network", "must be an object");
  check_known_keys(n, {"cells", "users_per_cell", "tx_antennas", "rx_antennas", "power", "snr_db", "noise_variance",
                       "weights"},
                   "network.");
  NetworkConfig<double> c;
  if (!n.contains("cells")) fail("network.cells", "is required");
  const int cells = get_as<int>(n["cells"], "network.cells");
  if (cells < 1) fail("network.cells", "must be >= 1");
  c.users_per_cell = per_cell<int>(n.value("users_per_cell", json(1)), "network.users_per_cell", cells);
  for (int u : c.users_per_cell)
    if (u < 1) fail("network.users_per_cell", "must be >= 1");
  c.tx_antennas = per_cell<int>(n.value("tx_antennas", json(1)), "network.tx_antennas", cells);
  c.rx_antennas = per_user<int>(n.value("rx_antennas", json(1)), "network.rx_antennas", c.users_per_cell);
  c.power = per_cell<double>(n.value("power", json(1.0)), "network.power", cells);
  for (double p : c.power)
    if (!(p > 0) || !std::isfinite(p)) fail("network.power", "must be positive");
  if (n.contains("snr_db") && n.contains("noise_variance")) fail("network.noise_variance", "conflicts with snr_db");
  if (n.contains("noise_variance")) {
    c.noise_variance = get_as<double>(n["noise_variance"], "network.noise_variance");
  } else {
    // SNR = 1 / sigma^2
    c.noise_variance = std::pow(10.0, -get_as<double>(n.value("snr_db", json(10.0)), "network.snr_db") / 10.0);
  }
  if (!(c.noise_variance > 0) || !std::isfinite(c.noise_variance)) {
    fail("network.noise_variance", "must be positive");
  }
  c.weights = per_user<double>(n.value("weights", json(1.0)), "network.weights", c.users_per_cell);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    fail("network", e.what());
  }
  return c;
}

std::string run_id(std::uint64_t seed, Algorithm a, std::optional<int> weight_index) {
  std::string id = "s" + std::to_string(seed) + "-" + std::string(to_string(a));
  if (weight_index) id += "-w" + std::to_string(*weight_index);
  return id;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json rates_json(const NetworkConfig<double>& config, const ChannelSet<double>& channels,
                const TransmitStrategy<double>& x) {
  return all_rates(config, channels, x);
}

}  // namespace

ExperimentSpec parse_spec(const json& doc, const Overrides& overrides) {
  if (!doc.is_object()) fail("spec", "must be a JSON object");
  check_known_keys(doc, {"schema_version", "scenario", "network", "algorithm", "epsilon", "max_outer", "n_starts",
                         "seeds", "solver", "boundary", "record_wallclock", "output_dir"},
                   "");
  if (!doc.contains("schema_version")) fail("schema_version", "is required");
  if (get_as<int>(doc["schema_version"], "schema_version") != kSchemaVersion) {
    fail("schema_version", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
  }
  ExperimentSpec s;
  s.scenario = get_as<std::string>(doc.value("scenario", json("unnamed")), "scenario");
  if (!doc.contains("network")) fail("network", "is required");
  s.network = parse_network(doc["network"]);

  std::string algorithm = overrides.algorithm.value_or(get_as<std::string>(doc.value("algorithm", json("both")), "algorithm"));
  if (algorithm == "both") {
    s.algorithms = {Algorithm::alg1, Algorithm::alg2};
  } else {
    try {
      s.algorithms = {parse_algorithm(algorithm)};
    } catch (const std::invalid_argument&) {
      fail("algorithm", "must be alg1, alg2 or both");
    }
  }

  s.settings.epsilon = overrides.epsilon.value_or(get_as<double>(doc.value("epsilon", json(1e-5)), "epsilon"));
  if (!(s.settings.epsilon > 0)) fail("epsilon", "must be positive");
  s.settings.max_outer = get_as<int>(doc.value("max_outer", json(1000)), "max_outer");
  if (s.settings.max_outer < 1) fail("max_outer", "must be >= 1");
  s.n_starts = get_as<int>(doc.value("n_starts", json(1)), "n_starts");
  if (s.n_starts < 1) fail("n_starts", "must be >= 1");

  if (doc.contains("solver")) {
    const json& sv = doc["solver"];
    if (!sv.is_object()) fail("solver", "must be an object");
    check_known_keys(sv, {"max_inner_iters", "grad_norm_tol", "backtrack", "sufficient_increase", "initial_step"},
                     "solver.");
    auto& in = s.settings.inner;
    in.max_inner_iters = get_as<int>(sv.value("max_inner_iters", json(in.max_inner_iters)), "solver.max_inner_iters");
    in.grad_norm_tol = get_as<double>(sv.value("grad_norm_tol", json(in.grad_norm_tol)), "solver.grad_norm_tol");
    in.backtrack = get_as<double>(sv.value("backtrack", json(in.backtrack)), "solver.backtrack");
    in.sufficient_increase =
        get_as<double>(sv.value("sufficient_increase", json(in.sufficient_increase)), "solver.sufficient_increase");
    in.initial_step = get_as<double>(sv.value("initial_step", json(in.initial_step)), "solver.initial_step");
    try {
      in.validate();
    } catch (const std::invalid_argument& e) {
      fail("solver", e.what());
    }
  }

  if (overrides.seed) {
    s.seeds = {*overrides.seed};
  } else {
    const json seeds = doc.value("seeds", json::array({1}));
    if (!seeds.is_array() || seeds.empty()) fail("seeds", "must be a non-empty list");
    for (const auto& v : seeds) s.seeds.push_back(get_as<std::uint64_t>(v, "seeds"));
  }

  if (doc.contains("boundary")) {
    const json& b = doc["boundary"];
    if (!b.is_object()) fail("boundary", "must be an object");
    check_known_keys(b, {"lambda1", "random_count", "weight_seed", "cloud_samples"}, "boundary.");
    if (s.network.total_users() != 2) fail("boundary", "requires exactly two users");
    BoundarySpec bs;
    if (b.contains("lambda1")) {
      if (b.contains("random_count")) fail("boundary.random_count", "conflicts with lambda1");
      for (const auto& v : b["lambda1"]) bs.lambda1.push_back(get_as<double>(v, "boundary.lambda1"));
    } else {
      // Uniform draws from [0, 1], reproducible from weight_seed.
      const int count = get_as<int>(b.value("random_count", json(10)), "boundary.random_count");
      if (count < 1) fail("boundary.random_count", "must be >= 1");
      std::mt19937_64 rng(get_as<std::uint64_t>(b.value("weight_seed", json(0)), "boundary.weight_seed"));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (int i = 0; i < count; ++i) bs.lambda1.push_back(unit(rng));
    }
    if (bs.lambda1.empty()) fail("boundary.lambda1", "must not be empty");
    for (double l : bs.lambda1)
      if (!(l >= 0 && l <= 1)) fail("boundary.lambda1", "entries must lie in [0, 1]");
    bs.cloud_samples = get_as<int>(b.value("cloud_samples", json(0)), "boundary.cloud_samples");
    if (bs.cloud_samples < 0) fail("boundary.cloud_samples", "must be >= 0");
    s.boundary = bs;
  }

  s.record_wallclock = get_as<bool>(doc.value("record_wallclock", json(true)), "record_wallclock");
  if (overrides.no_wallclock) s.record_wallclock = false;
  s.output_dir = overrides.output_dir.value_or(
      std::filesystem::path(get_as<std::string>(doc.value("output_dir", json("out")), "output_dir")));
  return s;
}

ExperimentSpec load_spec(const std::filesystem::path& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw SpecError("spec: cannot open '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("spec: parse error: ") + e.what());
  }
  return parse_spec(doc, overrides);
}

json to_json(const ExperimentSpec& spec) {
  json net;
  const auto& c = spec.network;
  net["cells"] = c.num_cells();
  net["users_per_cell"] = c.users_per_cell;
  net["tx_antennas"] = c.tx_antennas;
  net["rx_antennas"] = c.rx_antennas;
  net["power"] = c.power;
  net["noise_variance"] = c.noise_variance;
  net["weights"] = c.weights;

  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["scenario"] = spec.scenario;
  doc["network"] = net;
  doc["algorithm"] = spec.algorithms.size() == 2 ? "both" : std::string(to_string(spec.algorithms[0]));
  doc["epsilon"] = spec.settings.epsilon;
  doc["max_outer"] = spec.settings.max_outer;
  doc["n_starts"] = spec.n_starts;
  doc["seeds"] = spec.seeds;
  doc["solver"] = {{"max_inner_iters", spec.settings.inner.max_inner_iters},
                   {"grad_norm_tol", spec.settings.inner.grad_norm_tol},
                   {"backtrack", spec.settings.inner.backtrack},
                   {"sufficient_increase", spec.settings.inner.sufficient_increase},
                   {"initial_step", spec.settings.inner.initial_step}};
  if (spec.boundary) {
    doc["boundary"] = {{"lambda1", spec.boundary->lambda1}, {"cloud_samples", spec.boundary->cloud_samples}};
  }
  doc["record_wallclock"] = spec.record_wallclock;
  doc["output_dir"] = spec.output_dir.string();
  return doc;
}

ExperimentOutput execute(const ExperimentSpec& spec, int jobs) {
  struct Task {
    std::uint64_t seed;
    std::size_t channel_slot;
    Algorithm algorithm;
    std::optional<int> weight_index;
  };
  std::vector<ChannelSet<double>> channels;
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < spec.seeds.size(); ++s) {
    channels.push_back(generate_channels(spec.network, spec.seeds[s]));
    for (Algorithm a : spec.algorithms) {
      tasks.push_back({spec.seeds[s], s, a, std::nullopt});
      if (spec.boundary) {
        for (int w = 0; w < int(spec.boundary->lambda1.size()); ++w) tasks.push_back({spec.seeds[s], s, a, w});
      }
    }
  }

  ExperimentOutput out;
  out.runs.resize(tasks.size());
  parallel_for(int(tasks.size()), jobs, [&](int t) {
    const Task& task = tasks[std::size_t(t)];
    NetworkConfig<double> config = spec.network;
    std::optional<double> lambda1;
    if (task.weight_index) {
      lambda1 = spec.boundary->lambda1[std::size_t(*task.weight_index)];
      // users in cell-major order: the first gets lambda1, the second 1 - lambda1
      int seen = 0;
      for (auto& cell : config.weights)
        for (auto& w : cell) w = seen++ == 0 ? *lambda1 : 1.0 - *lambda1;
    }
    RunRecord rec;
    rec.run_id = run_id(task.seed, task.algorithm, task.weight_index);
    rec.seed = task.seed;
    rec.algorithm = task.algorithm;
    rec.lambda1 = lambda1;
    rec.result =
        multi_start(task.algorithm, config, channels[task.channel_slot], spec.n_starts, task.seed, spec.settings, 1);
    out.runs[std::size_t(t)] = std::move(rec);
  });

  if (spec.boundary && spec.boundary->cloud_samples > 0) {
    for (std::size_t s = 0; s < spec.seeds.size(); ++s) {
      std::mt19937_64 rng(spec.seeds[s] ^ 0x9e3779b97f4a7c15ULL);
      std::vector<UserIndex> users;
      for (int k = 0; k < spec.network.num_cells(); ++k)
        for (int i = 0; i < spec.network.num_users(k); ++i) users.push_back({k, i});
      for (int n = 0; n < spec.boundary->cloud_samples; ++n) {
        const auto x = sample_random_strategy(spec.network, rng());
        out.cloud.push_back({spec.seeds[s], achievable_rate(spec.network, channels[s], x, users[0]),
                             achievable_rate(spec.network, channels[s], x, users[1])});
      }
    }
  }
  return out;
}

std::string trace_csv(const ExperimentSpec& spec, const ExperimentOutput& out) {
  std::ostringstream os;
  os << "run_id,algorithm,outer_iter,lower_bound_bits,master_value_bits,wallclock_ms\n";
  for (const auto& run : out.runs) {
    const auto& best = run.result.best_run();
    for (const auto& it : best.trace.iterations) {
      os << run.run_id << ',' << to_string(run.algorithm) << ',' << it.outer_iter << ',' << fmt(it.lower_bound_bits)
         << ',' << fmt(it.master_value_bits) << ',' << (spec.record_wallclock ? fmt(it.wallclock_ms) : "0") << '\n';
    }
  }
  return os.str();
}

std::string boundary_csv(const ExperimentOutput& out) {
  std::ostringstream os;
  os << "run_id,seed,algorithm,lambda1,R1,R2\n";
  for (const auto& run : out.runs) {
    if (!run.lambda1) continue;
    const auto& best = run.result.best_run();
    const auto rates = all_rates(best.config, generate_channels(best.config, run.seed), best.x);
    std::vector<double> flat;
    for (const auto& c : rates) flat.insert(flat.end(), c.begin(), c.end());
    os << run.run_id << ',' << run.seed << ',' << to_string(run.algorithm) << ',' << fmt(*run.lambda1) << ','
       << fmt(flat.at(0)) << ',' << fmt(flat.at(1)) << '\n';
  }
  return os.str();
}

std::string cloud_csv(const ExperimentOutput& out) {
  std::ostringstream os;
  os << "seed,R1,R2\n";
  for (const auto& c : out.cloud) os << c.seed << ',' << fmt(c.r1) << ',' << fmt(c.r2) << '\n';
  return os.str();
}

json summary_json(const ExperimentSpec& spec, const ExperimentOutput& out) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["spec"] = to_json(spec);
  json runs = json::array();
  for (const auto& run : out.runs) {
    const auto& best = run.result.best_run();
    json r;
    r["run_id"] = run.run_id;
    r["seed"] = run.seed;
    r["algorithm"] = std::string(to_string(run.algorithm));
    if (run.lambda1) r["lambda1"] = *run.lambda1;
    r["final_weighted_sum_rate"] = best.weighted_sum_rate;
    r["rates"] = rates_json(best.config, generate_channels(best.config, run.seed), best.x);
    r["iterations"] = best.iterations;
    r["converged"] = best.converged;
    r["initial_lower_bound"] = best.trace.initial_lower_bound_bits;
    r["best_start"] = run.result.best;
    json starts = json::array();
    for (const auto& s : run.result.runs) {
      starts.push_back({{"final_weighted_sum_rate", s.weighted_sum_rate},
                        {"iterations", s.iterations},
                        {"converged", s.converged}});
    }
    r["starts"] = starts;
    runs.push_back(r);
  }
  doc["runs"] = runs;
  if (spec.boundary) doc["cloud_samples"] = out.cloud.size();
  return doc;
}

void write_outputs(const ExperimentSpec& spec, const ExperimentOutput& out) {
  std::filesystem::create_directories(spec.output_dir);
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream f(spec.output_dir / name, std::ios::binary);
    if (!f) throw std::runtime_error(std::string("cannot write ") + (spec.output_dir / name).string());
    f << text;
  };
  write("summary.json", summary_json(spec, out).dump(2) + "\n");
  write("trace.csv", trace_csv(spec, out));
  if (spec.boundary) {
    write("boundary.csv", boundary_csv(out));
    write("cloud.csv", cloud_csv(out));
  }
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> row;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.emplace_back();
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace gbd::experiment

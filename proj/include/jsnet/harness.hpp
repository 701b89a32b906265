#pragma once

// Experiment sweeps: config parsing, seeded ensembles, CSV persistence and
// per-group summaries.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"

#include "jsnet/core_model.hpp"
#include "jsnet/dcomp.hpp"
#include "jsnet/djadmm.hpp"
#include "jsnet/djist.hpp"
#include "jsnet/graph.hpp"
#include "jsnet/ledger.hpp"
#include "jsnet/run_result.hpp"

namespace jsnet {

enum class SweepVariable { Measurements, Nodes };

/// "complete" or "regular-d" with d counting the node itself.
struct TopologySpec {
  bool complete = false;
  std::size_t degree = 5;

  std::string label() const { return complete ? "complete" : "regular-" + std::to_string(degree); }

  static TopologySpec parse(std::string_view s) {
    if (s == "complete") return {true, 0};
    constexpr std::string_view prefix = "regular-";
    if (s.substr(0, prefix.size()) == prefix) {
      std::size_t d = 0;
      const auto tail = s.substr(prefix.size());
      const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), d);
      if (ec == std::errc() && ptr == tail.data() + tail.size() && d >= 2) return {false, d};
    }
    throw ConfigError("topology must be 'complete' or 'regular-<d>' with d >= 2, got '" + std::string(s) + "'");
  }

  Topology build(std::size_t nodes, std::uint64_t seed) const {
    if (nodes == 1) return single_node();
    return complete ? jsnet::complete(nodes) : random_regular(nodes, degree, seed);
  }
};

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::DjIst;
  TopologySpec topology;
  std::size_t n = 100;
  std::size_t k = 10;
  std::size_t m = 18;      // fixed value when sweeping V
  std::size_t nodes = 10;  // fixed value when sweeping m
  double noise_std = 0.0;
  SweepVariable sweep = SweepVariable::Measurements;
  std::vector<std::size_t> sweep_values;
  AlgoParams params;
  std::size_t signal_sets = 10;
  std::size_t matrices_per_set = 5;
  std::uint64_t seed = 1;
  std::string output = "sweep.csv";
  bool auto_shrink_tau = false;
  std::map<std::size_t, double> tau_overrides;  // sweep value -> tau
  std::size_t threads = 1;                      // 0: hardware concurrency

  std::size_t runs() const { return signal_sets * matrices_per_set; }

  /// The large ensemble: 50 signal sets of 5 matrices each.
  void use_full_ensemble() {
    signal_sets = 50;
    matrices_per_set = 5;
  }

  void validate() const {
    if (sweep_values.empty()) throw ConfigError("sweep list is empty");
    if (runs() == 0) throw ConfigError("signal_sets and matrices_per_set must be >= 1");
    if (n == 0 || k == 0 || k > n) throw ConfigError("need 1 <= k <= n");
    if (noise_std < 0.0) throw ConfigError("noise_std must be >= 0");
    for (auto v : sweep_values) {
      const std::size_t mm = sweep == SweepVariable::Measurements ? v : m;
      const std::size_t vv = sweep == SweepVariable::Nodes ? v : nodes;
      if (mm == 0 || mm >= n) throw ConfigError("every m must satisfy 1 <= m < n");
      if (vv == 0) throw ConfigError("every V must be >= 1");
    }
    try {
      params.validate();
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
};

namespace detail {

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "algorithm", "topology", "n", "k", "m", "V", "m_list", "V_list", "noise_std", "lambda", "alpha",
      "beta", "tau", "epsilon", "p", "q", "max_iters", "rho", "stop_rule", "stop_scope", "signal_sets",
      "matrices_per_set", "seed", "output", "auto_shrink_tau", "tau_overrides", "threads"};
  return keys;
}

template <class T>
T json_get(const nlohmann::json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace detail

/// Flat JSON object; every key is optional except the sweep list, unknown
/// keys are rejected. DJ-ADMM starts from AlgoParams::admm_defaults().
inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using detail::json_get;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const auto& keys = detail::config_keys();
  for (const auto& item : j.items())
    if (std::find(keys.begin(), keys.end(), item.key()) == keys.end())
      throw ConfigError("unknown config key '" + item.key() + "'");

  ExperimentConfig c;
  if (j.contains("algorithm")) {
    try {
      c.algorithm = parse_algorithm(json_get<std::string>(j, "algorithm"));
    } catch (const InvalidParameter& e) {
      throw ConfigError(e.what());
    }
  }
  if (c.algorithm == Algorithm::DjAdmm) c.params = AlgoParams::admm_defaults();
  if (j.contains("topology")) c.topology = TopologySpec::parse(json_get<std::string>(j, "topology"));
  if (j.contains("n")) c.n = json_get<std::size_t>(j, "n");
  if (j.contains("k")) c.k = json_get<std::size_t>(j, "k");
  if (j.contains("m")) c.m = json_get<std::size_t>(j, "m");
  if (j.contains("V")) c.nodes = json_get<std::size_t>(j, "V");
  if (j.contains("m_list") == j.contains("V_list"))
    throw ConfigError("exactly one of m_list and V_list must be given");
  if (j.contains("m_list")) {
    c.sweep = SweepVariable::Measurements;
    c.sweep_values = json_get<std::vector<std::size_t>>(j, "m_list");
  } else {
    c.sweep = SweepVariable::Nodes;
    c.sweep_values = json_get<std::vector<std::size_t>>(j, "V_list");
  }
  if (j.contains("noise_std")) c.noise_std = json_get<double>(j, "noise_std");
  auto& p = c.params;
  if (j.contains("lambda")) p.lambda = json_get<double>(j, "lambda");
  if (j.contains("alpha")) p.alpha = json_get<double>(j, "alpha");
  if (j.contains("beta")) p.beta = json_get<double>(j, "beta");
  if (j.contains("tau")) p.tau = json_get<double>(j, "tau");
  if (j.contains("epsilon")) p.epsilon = json_get<double>(j, "epsilon");
  if (j.contains("p")) p.p = json_get<unsigned>(j, "p");
  if (j.contains("q")) p.q = json_get<unsigned>(j, "q");
  if (j.contains("max_iters")) p.max_iters = json_get<std::size_t>(j, "max_iters");
  if (j.contains("rho")) p.rho = json_get<double>(j, "rho");
  if (j.contains("stop_rule")) {
    const auto s = json_get<std::string>(j, "stop_rule");
    if (s == "max_abs") p.stop_rule = StopRule::MaxAbs;
    else if (s == "l2") p.stop_rule = StopRule::L2;
    else throw ConfigError("stop_rule must be 'max_abs' or 'l2'");
  }
  if (j.contains("stop_scope")) {
    const auto s = json_get<std::string>(j, "stop_scope");
    if (s == "global") p.stop_scope = StopScope::Global;
    else if (s == "per_node") p.stop_scope = StopScope::PerNode;
    else throw ConfigError("stop_scope must be 'global' or 'per_node'");
  }
  if (j.contains("signal_sets")) c.signal_sets = json_get<std::size_t>(j, "signal_sets");
  if (j.contains("matrices_per_set")) c.matrices_per_set = json_get<std::size_t>(j, "matrices_per_set");
  if (j.contains("seed")) c.seed = json_get<std::uint64_t>(j, "seed");
  if (j.contains("output")) c.output = json_get<std::string>(j, "output");
  if (j.contains("auto_shrink_tau")) c.auto_shrink_tau = json_get<bool>(j, "auto_shrink_tau");
  if (j.contains("threads")) c.threads = json_get<std::size_t>(j, "threads");
  if (j.contains("tau_overrides")) {
    const auto& t = j.at("tau_overrides");
    if (!t.is_object()) throw ConfigError("tau_overrides must map sweep values to tau");
    for (const auto& item : t.items()) {
      std::size_t key = 0;
      const auto& s = item.key();
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), key);
      if (ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError("tau_overrides key '" + s + "' is not a sweep value");
      if (!item.value().is_number()) throw ConfigError("tau_overrides values must be numbers");
      c.tau_overrides[key] = item.value().get<double>();
    }
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

struct SweepRow {
  std::string algorithm;
  std::string topology;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t k = 0;
  std::size_t nodes = 0;
  std::size_t run_id = 0;
  double ase = 0.0;
  double pesr = 0.0;
  double rse = 0.0;
  std::size_t iterations = 0;
  std::uint64_t total_bits = 0;
  std::optional<std::size_t> t1;
  bool converged = false;

  bool operator==(const SweepRow&) const = default;
};

/// One executed ensemble member.
struct RunRecord {
  ProblemInstance instance;
  Topology topology;
  AlgoParams params;
  RunResult result;
  SweepRow row;
  std::optional<std::string> warning;
};

inline RunResult run_algorithm(Algorithm algo, const ProblemInstance& inst, const Topology& topo,
                               const AlgoParams& params) {
  switch (algo) {
    case Algorithm::DjIst: return run_djist(inst, topo, params);
    case Algorithm::DjAdmm: return run_djadmm(inst, topo, params);
    case Algorithm::DcOmp1: return run_dcomp1(inst, topo, params);
    case Algorithm::DcOmp2: return run_dcomp2(inst, topo, params);
  }
  throw InvalidParameter("unknown algorithm");
}

/// Seeds depend on (master seed, sweep variable, sweep value, run), so a point
/// reproduces on its own and different algorithms at the same point see the
/// same instances. Run r uses signal set r / matrices_per_set and matrix
/// r % matrices_per_set of that set; the regular topology is redrawn per run.
inline RunRecord execute_run(const ExperimentConfig& cfg, std::size_t sweep_value, std::size_t run_id) {
  const std::size_t m = cfg.sweep == SweepVariable::Measurements ? sweep_value : cfg.m;
  const std::size_t nodes = cfg.sweep == SweepVariable::Nodes ? sweep_value : cfg.nodes;
  const std::uint64_t point_seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(cfg.sweep), sweep_value});
  const std::size_t set = run_id / cfg.matrices_per_set;
  const std::size_t mat = run_id % cfg.matrices_per_set;

  RunRecord rec{generate_instance(cfg.n, m, cfg.k, nodes, cfg.noise_std, derive_seed(point_seed, {0, set}),
                                  derive_seed(point_seed, {1, set, mat}), DimensionPolicy::AllowSparsityAboveM),
                cfg.topology.build(nodes, derive_seed(point_seed, {2, run_id})), cfg.params, {}, {}, {}};
  rec.instance.seed = derive_seed(point_seed, {3, run_id});

  auto& params = rec.params;
  if (auto it = cfg.tau_overrides.find(sweep_value); it != cfg.tau_overrides.end()) params.tau = it->second;
  if (cfg.algorithm == Algorithm::DjIst && params.check_tau) {
    const double bound = max_admissible_tau(rec.instance);
    if (params.tau >= bound) {
      if (!cfg.auto_shrink_tau)
        throw InvalidParameter("tau " + std::to_string(params.tau) + " >= " + std::to_string(bound) +
                               " at sweep value " + std::to_string(sweep_value) + ", run " +
                               std::to_string(run_id));
      const double original = params.tau;
      while (params.tau >= bound) params.tau /= 2.0;
      rec.warning = "sweep value " + std::to_string(sweep_value) + ", run " + std::to_string(run_id) +
                    ": tau shrunk from " + std::to_string(original) + " to " + std::to_string(params.tau);
    }
  }

  rec.result = run_algorithm(cfg.algorithm, rec.instance, rec.topology, params);
  const auto metrics = rec.result.metrics(rec.instance);
  rec.row = SweepRow{std::string(to_string(cfg.algorithm)),
                     cfg.topology.label(),
                     cfg.n,
                     m,
                     cfg.k,
                     nodes,
                     run_id,
                     metrics.ase,
                     metrics.pesr,
                     metrics.rse,
                     rec.result.rounds,
                     rec.result.total_bits(),
                     rec.result.stabilization.t1,
                     rec.result.converged};
  return rec;
}

struct SweepResult {
  std::vector<SweepRow> rows;  // ordered by (sweep point, run)
  std::vector<std::string> warnings;
};

/// Runs every (sweep point, run) pair, optionally on worker threads. The
/// output order and content do not depend on the thread count.
inline SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t runs = cfg.runs();
  const std::size_t total = cfg.sweep_values.size() * runs;
  std::vector<SweepRow> rows(total);
  std::vector<std::optional<std::string>> warnings(total);
  std::vector<std::exception_ptr> errors(total);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t t = next++; t < total; t = next++) {
      try {
        auto rec = execute_run(cfg, cfg.sweep_values[t / runs], t % runs);
        rows[t] = std::move(rec.row);
        warnings[t] = std::move(rec.warning);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  std::size_t threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
  threads = std::min(threads, std::max<std::size_t>(total, 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  SweepResult out;
  out.rows = std::move(rows);
  for (auto& w : warnings)
    if (w) out.warnings.push_back(std::move(*w));
  return out;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view sweep_csv_header =
    "algorithm,topology,n,m,k,V,run_id,ase,pesr,rse,iterations,total_bits,t1,converged";

namespace detail {

/// Shortest representation that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw IoError("cannot format number");
  return std::string(buf, ptr);
}

template <class T>
T parse_number(std::string_view field, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw IoError("CSV line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
  return value;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

inline void write_rows(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << sweep_csv_header << '\n';
  for (const auto& r : rows) {
    os << r.algorithm << ',' << r.topology << ',' << r.n << ',' << r.m << ',' << r.k << ',' << r.nodes << ','
       << r.run_id << ',' << detail::format_double(r.ase) << ',' << detail::format_double(r.pesr) << ','
       << detail::format_double(r.rse) << ',' << r.iterations << ',' << r.total_bits << ',';
    if (r.t1) os << *r.t1;
    os << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

inline std::vector<SweepRow> read_rows(std::istream& is) {
  using detail::parse_number;
  std::string line;
  if (!std::getline(is, line)) throw IoError("CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != sweep_csv_header) throw IoError("unexpected CSV header '" + line + "'");
  std::vector<SweepRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split_fields(line);
    if (f.size() != 14) throw IoError("CSV line " + std::to_string(lineno) + ": expected 14 fields");
    SweepRow r;
    r.algorithm = std::string(f[0]);
    r.topology = std::string(f[1]);
    r.n = parse_number<std::size_t>(f[2], lineno);
    r.m = parse_number<std::size_t>(f[3], lineno);
    r.k = parse_number<std::size_t>(f[4], lineno);
    r.nodes = parse_number<std::size_t>(f[5], lineno);
    r.run_id = parse_number<std::size_t>(f[6], lineno);
    r.ase = parse_number<double>(f[7], lineno);
    r.pesr = parse_number<double>(f[8], lineno);
    r.rse = parse_number<double>(f[9], lineno);
    r.iterations = parse_number<std::size_t>(f[10], lineno);
    r.total_bits = parse_number<std::uint64_t>(f[11], lineno);
    if (!f[12].empty()) r.t1 = parse_number<std::size_t>(f[12], lineno);
    const auto conv = parse_number<int>(f[13], lineno);
    if (conv != 0 && conv != 1) throw IoError("CSV line " + std::to_string(lineno) + ": converged must be 0 or 1");
    r.converged = conv == 1;
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Writes to a sibling temporary file and renames it over `path`.
inline void write_csv_atomic(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    write_rows(out, rows);
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::vector<SweepRow> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_rows(in);
}

// ---------------------------------------------------------------------------
// Summaries

struct Stat {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct SummaryRow {
  std::vector<std::string> key;  // values of the group keys, in order
  std::size_t count = 0;
  Stat ase, pesr, rse, iterations, bits;
};

inline std::string group_field(const SweepRow& r, std::string_view key) {
  if (key == "algorithm") return r.algorithm;
  if (key == "topology") return r.topology;
  if (key == "n") return std::to_string(r.n);
  if (key == "m") return std::to_string(r.m);
  if (key == "k") return std::to_string(r.k);
  if (key == "V") return std::to_string(r.nodes);
  throw InvalidParameter("cannot group by '" + std::string(key) + "'");
}

/// Mean, min and max per group, groups ordered by first appearance.
inline std::vector<SummaryRow> summarize(const std::vector<SweepRow>& rows, const std::vector<std::string>& keys) {
  if (rows.empty()) throw InvalidParameter("summarize: no rows");
  std::vector<SummaryRow> out;
  std::map<std::vector<std::string>, std::size_t> where;
  auto fold = [](Stat& s, double x, std::size_t count) {
    if (count == 1) {
      s = {x, x, x};
      return;
    }
    s.mean += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  };
  for (const auto& r : rows) {
    std::vector<std::string> key;
    for (const auto& k : keys) key.push_back(group_field(r, k));
    auto [it, fresh] = where.try_emplace(key, out.size());
    if (fresh) out.push_back(SummaryRow{key, 0, {}, {}, {}, {}, {}});
    auto& s = out[it->second];
    ++s.count;
    fold(s.ase, r.ase, s.count);
    fold(s.pesr, r.pesr, s.count);
    fold(s.rse, r.rse, s.count);
    fold(s.iterations, static_cast<double>(r.iterations), s.count);
    fold(s.bits, static_cast<double>(r.total_bits), s.count);
  }
  for (auto& s : out)
    for (Stat* st : {&s.ase, &s.pesr, &s.rse, &s.iterations, &s.bits}) st->mean /= static_cast<double>(s.count);
  return out;
}

inline void write_summary(std::ostream& os, const std::vector<std::string>& keys,
                          const std::vector<SummaryRow>& summary) {
  for (const auto& k : keys) os << k << ',';
  os << "count";
  for (const char* name : {"ase", "pesr", "rse", "iterations", "bits"})
    os << ',' << name << "_mean," << name << "_min," << name << "_max";
  os << '\n';
  for (const auto& s : summary) {
    for (const auto& v : s.key) os << v << ',';
    os << s.count;
    for (const Stat* st : {&s.ase, &s.pesr, &s.rse, &s.iterations, &s.bits})
      os << ',' << detail::format_double(st->mean) << ',' << detail::format_double(st->min) << ','
         << detail::format_double(st->max);
    os << '\n';
  }
}

}  // namespace jsnet

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "jsnet/jsnet.hpp"

namespace fs = std::filesystem;
using namespace jsnet;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool full = false;
};

ExperimentConfig prepared_config(const Common& c) {
  auto cfg = load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.full) cfg.use_full_ensemble();
  return cfg;
}

fs::path output_path(const Common& c, const std::string& fallback) {
  if (c.out.empty()) return fallback;
  return fs::path(c.out) / fs::path(fallback).filename();
}

void print_row(const SweepRow& r) {
  std::cout << r.algorithm << " " << r.topology << " n=" << r.n << " m=" << r.m << " k=" << r.k << " V=" << r.nodes
            << " run=" << r.run_id << "\n"
            << "  ase        " << r.ase << "\n"
            << "  pesr       " << r.pesr << "\n"
            << "  rse        " << r.rse << "\n"
            << "  iterations " << r.iterations << (r.converged ? "" : " (cap reached)") << "\n"
            << "  total bits " << r.total_bits << "\n"
            << "  t1         " << (r.t1 ? std::to_string(*r.t1) : std::string("-")) << "\n";
}

int cmd_run(const Common& c, std::optional<std::size_t> at, std::size_t run_id) {
  auto cfg = prepared_config(c);
  const std::size_t value = at.value_or(cfg.sweep_values.front());
  auto rec = execute_run(cfg, value, run_id);
  if (rec.warning) std::cerr << "warning: " << *rec.warning << "\n";
  print_row(rec.row);
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    const fs::path ledger_path = fs::path(c.out) / "ledger.csv";
    std::ofstream ledger(ledger_path);
    if (!ledger) throw IoError("cannot write " + ledger_path.string());
    rec.result.ledger.write_csv(ledger);
    write_csv_atomic(fs::path(c.out) / "run.csv", {rec.row});
    std::cout << "wrote " << ledger_path.string() << "\n";
  }
  return 0;
}

int cmd_sweep(const Common& c, std::optional<std::size_t> threads) {
  auto cfg = prepared_config(c);
  if (threads) cfg.threads = *threads;
  const auto path = output_path(c, cfg.output);
  auto result = run_sweep(cfg);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  write_csv_atomic(path, result.rows);
  std::cout << "wrote " << result.rows.size() << " rows to " << path.string() << "\n";
  return 0;
}

std::vector<SweepRow> read_all(const std::vector<std::string>& files) {
  std::vector<SweepRow> rows;
  for (const auto& f : files) {
    auto part = read_csv(f);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  return rows;
}

int cmd_summarize(const std::vector<std::string>& files, const std::vector<std::string>& keys, const std::string& out) {
  const auto summary = summarize(read_all(files), keys);
  if (out.empty()) {
    write_summary(std::cout, keys, summary);
  } else {
    std::ofstream os(out);
    if (!os) throw IoError("cannot write " + out);
    write_summary(os, keys, summary);
  }
  return 0;
}

int cmd_ranges(std::size_t n, std::size_t k, std::size_t nodes, std::size_t d, unsigned q, unsigned p) {
  std::cout << "n=" << n << " k=" << k << " V=" << nodes << " d=" << d << " q=" << q << " p=" << p
            << " r=" << index_bits(n) << "\n";
  std::cout << std::left << std::setw(10) << "algorithm" << std::right << std::setw(14) << "min bits" << std::setw(14)
            << "max bits" << "\n";
  for (auto a : {Algorithm::DcOmp1, Algorithm::DcOmp2, Algorithm::DjIst, Algorithm::DjAdmm}) {
    const auto range = analytic_range(a, n, k, nodes, d, q, p);
    std::cout << std::left << std::setw(10) << to_string(a) << std::right << std::setw(14) << range.min
              << std::setw(14) << range.max << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed joint sparse recovery simulator"};
  app.require_subcommand(1);

  Common common;
  std::optional<std::size_t> at;
  std::size_t run_id = 0;
  auto* run = app.add_subcommand("run", "execute one ensemble member of a config");
  run->add_option("--config", common.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", common.seed, "override the master seed");
  run->add_option("--out", common.out, "directory for ledger.csv and run.csv");
  run->add_flag("--full", common.full, "use the 50 x 5 ensemble");
  run->add_option("--at", at, "sweep value (default: first in the list)");
  run->add_option("--run", run_id, "run index within the ensemble");

  std::optional<std::size_t> threads;
  auto* sweep = app.add_subcommand("sweep", "execute every sweep point and run of a config");
  sweep->add_option("--config", common.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--seed", common.seed, "override the master seed");
  sweep->add_option("--out", common.out, "output directory (default: the config's output path)");
  sweep->add_flag("--full", common.full, "use the 50 x 5 ensemble");
  sweep->add_option("--threads", threads, "worker threads, 0 = all cores");

  std::vector<std::string> csv_files;
  std::vector<std::string> keys{"algorithm", "topology", "m", "V"};
  std::string summary_out;
  auto* summ = app.add_subcommand("summarize", "mean/min/max per group of sweep CSV rows");
  summ->add_option("csv", csv_files, "sweep CSV files")->required()->check(CLI::ExistingFile);
  summ->add_option("--by", keys, "group keys among algorithm, topology, n, m, k, V")->delimiter(',');
  summ->add_option("--out", summary_out, "write the table to a file instead of stdout");

  PlotSpec spec;
  std::string plot_out = "plot.svg";
  auto* plot = app.add_subcommand("plot", "render sweep CSV rows as an SVG line plot");
  plot->add_option("csv", csv_files, "sweep CSV files")->required()->check(CLI::ExistingFile);
  plot->add_option("--x", spec.x, "m or V")->check(CLI::IsMember({"m", "V"}));
  plot->add_option("--y", spec.y, "metric")->check(CLI::IsMember({"ase", "pesr", "rse", "iterations", "bits"}));
  plot->add_flag("--log-y", spec.log_y, "logarithmic y axis");
  plot->add_option("--series", spec.series, "algorithm or algorithm/topology to include")->delimiter(',');
  plot->add_option("--title", spec.title, "plot title");
  plot->add_option("--out", plot_out, "output SVG path");

  std::size_t n = 100, k = 10, nodes = 10, d = 5;
  unsigned q = 16, p = 20;
  auto* ranges = app.add_subcommand("ranges", "analytic bit ranges on a d-regular topology");
  ranges->add_option("--n", n, "ambient dimension");
  ranges->add_option("--k", k, "sparsity");
  ranges->add_option("--V", nodes, "node count");
  ranges->add_option("--d", d, "degree, counting the node itself");
  ranges->add_option("--q", q, "bits per quantized real");
  ranges->add_option("--p", p, "switch cap");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(common, at, run_id);
    if (*sweep) return cmd_sweep(common, threads);
    if (*summ) return cmd_summarize(csv_files, keys, summary_out);
    if (*plot) {
      emit_plot(read_all(csv_files), spec, plot_out);
      std::cout << "wrote " << plot_out << "\n";
      return 0;
    }
    if (*ranges) return cmd_ranges(n, k, nodes, d, q, p);
  } catch (const jsnet::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

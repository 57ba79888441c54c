// sclbench: run, summarize and plot streaming continual-learning benchmarks.
//
//   sclbench run --config <path> [--out <dir>] [--jobs N] [--master-seed S]
//   sclbench report --in <dir>
//   sclbench plot --in <dir> --out <file>
//
// Exit codes: 0 success, 1 configuration or input error, 2 if any run failed.

#include "sclbench/config.hpp"
#include "sclbench/errors.hpp"
#include "sclbench/grid.hpp"
#include "sclbench/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRunFailed = 2;

void print_summary(const std::vector<sclbench::SummaryRow>& rows) {
  std::printf("%-12s %-10s %5s  %-16s %-16s %-16s\n", "strategy", "scenario", "runs", "K_avg",
              "BWT", "AAA");
  for (const auto& r : rows) {
    std::printf("%-12s %-10s %5zu  %6.3f +- %5.3f   %6.3f +- %5.3f   %6.3f +- %5.3f\n",
                r.strategy.c_str(), r.scenario.c_str(), r.runs, r.k_avg.mean, r.k_avg.std,
                r.bwt.mean, r.bwt.std, r.aaa.mean, r.aaa.std);
  }
}

std::optional<std::size_t> env_jobs() {
  const char* v = std::getenv("SCLBENCH_JOBS");
  if (v == nullptr || *v == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long n = std::strtoul(v, &end, 10);
  if (*end != '\0' || n == 0) {
    std::cerr << "warning: ignoring invalid SCLBENCH_JOBS='" << v << "'\n";
    return std::nullopt;
  }
  return static_cast<std::size_t>(n);
}

int report_failures(const std::vector<sclbench::RunResult>& runs) {
  int failed = 0;
  for (const auto& r : runs) {
    if (!r.ok) {
      std::cerr << "run failed: " << r.strategy << " seed " << r.seed << ": " << r.error << "\n";
      ++failed;
    }
  }
  return failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming continual learning benchmark"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::size_t> jobs;
  std::optional<std::uint64_t> master_seed;
  auto* run = app.add_subcommand("run", "Run the (strategy x seed) grid of a config file");
  run->add_option("--config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (default: output.dir of the config)");
  run->add_option("--jobs", jobs, "Concurrent runs (default: SCLBENCH_JOBS, then config)");
  run->add_option("--master-seed", master_seed, "Master seed (default: config)");

  std::string in_dir;
  auto* report = app.add_subcommand("report", "Recompute summary.csv from per-run files");
  report->add_option("--in", in_dir, "Output directory of a previous run")->required();

  std::string plot_out;
  auto* plot = app.add_subcommand("plot", "Render windowed kappa over steps as SVG");
  plot->add_option("--in", in_dir, "Output directory of a previous run")->required();
  plot->add_option("--out", plot_out, "SVG file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (run->parsed()) {
    sclbench::ExperimentConfig config;
    try {
      config = sclbench::parse_config(config_path);
    } catch (const sclbench::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kConfigError;
    }
    const std::size_t n_jobs = jobs.value_or(env_jobs().value_or(config.output.jobs));
    const std::uint64_t seed = master_seed.value_or(config.output.master_seed);
    if (out_dir.empty()) out_dir = config.output.dir;
    auto runs = sclbench::run_grid(config, n_jobs, seed, out_dir);
    try {
      sclbench::emit_report(runs, out_dir);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kRunFailed;
    }
    std::vector<sclbench::RunResult> ok;
    for (const auto& r : runs) {
      if (r.ok) ok.push_back(r);
    }
    if (!ok.empty()) print_summary(sclbench::aggregate_runs(ok));
    return report_failures(runs) > 0 ? kRunFailed : kOk;
  }

  if (report->parsed()) {
    try {
      auto runs = sclbench::load_runs(in_dir);
      std::vector<sclbench::RunResult> ok;
      for (const auto& r : runs) {
        if (r.ok) ok.push_back(r);
      }
      if (ok.empty()) {
        std::cerr << "no successful runs in " << in_dir << "\n";
        return kRunFailed;
      }
      const auto rows = sclbench::aggregate_runs(ok);
      sclbench::write_summary_csv(rows, std::filesystem::path(in_dir) / "summary.csv");
      print_summary(rows);
      return report_failures(runs) > 0 ? kRunFailed : kOk;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kConfigError;
    }
  }

  if (plot->parsed()) {
    try {
      const std::string svg =
          sclbench::plot_from_prequential(std::filesystem::path(in_dir) / "prequential.csv");
      std::ofstream out(plot_out, std::ios::binary);
      if (!(out << svg)) throw std::runtime_error("cannot write " + plot_out);
      return kOk;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kConfigError;
    }
  }
  return kOk;
}

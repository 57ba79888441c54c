#pragma once

#include "sclbench/grid.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace sclbench {

inline constexpr int kSchemaVersion = 1;

/// Per-cell directory under an output root.
std::filesystem::path run_dir(const std::filesystem::path& root, const RunResult& run);

/// trace.csv and kmatrix.json for one successful cell.
void write_run_files(const RunResult& run, const std::filesystem::path& root);

/// Writes prequential.csv, clmatrix.json, summary.csv, run_status.csv and one
/// kappa_<scenario>.svg per scenario. Failed runs only appear in run_status.csv.
void emit_report(const std::vector<RunResult>& runs, const std::filesystem::path& out_dir);

/// Re-reads the per-cell files listed in run_status.csv (matrix + trace) and recomputes metrics.
std::vector<RunResult> load_runs(const std::filesystem::path& out_dir);

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path);

/// Mean windowed kappa per strategy over seeds, with one vertical marker per drift boundary.
struct KappaSeries {
  std::string label;
  std::vector<double> kappa;  ///< one value per step
};
std::string render_kappa_svg(const std::string& title, const std::vector<KappaSeries>& series,
                             const std::vector<std::int64_t>& drift_boundaries);

/// Builds the SVG from an output directory's prequential.csv (first scenario found there).
std::string plot_from_prequential(const std::filesystem::path& prequential_csv);

}  // namespace sclbench

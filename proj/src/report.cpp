#include "sclbench/report.hpp"

#include "sclbench/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sclbench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string schema_line() { return "# schema_version=" + std::to_string(kSchemaVersion) + "\n"; }

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

json matrix_json(const Eigen::MatrixXd& k) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j <= i; ++j) row.push_back(k(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json run_json(const RunResult& r) {
  return {{"strategy", r.strategy},
          {"scenario", r.scenario},
          {"seed_index", r.seed_index},
          {"seed", r.seed},
          {"matrix", matrix_json(r.kappa_matrix)},
          {"k_avg", r.k_avg},
          {"bwt", std::isfinite(r.bwt) ? json(r.bwt) : json(nullptr)},
          {"aaa", r.aaa},
          {"drift_boundaries", r.drift_boundaries}};
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) cells.push_back(cell);
  if (!line.empty() && line.back() == sep) cells.emplace_back();
  return cells;
}

/// Data lines of a schema-versioned CSV, header excluded.
std::vector<std::vector<std::string>> read_csv(const fs::path& path, std::size_t columns) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    auto cells = split(line);
    if (cells.size() != columns) throw ParseError(line_no, path.filename().string() + ": wrong column count");
    rows.push_back(std::move(cells));
  }
  return rows;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

}  // namespace

fs::path run_dir(const fs::path& root, const RunResult& run) {
  return root / "runs" / run.strategy / ("seed" + std::to_string(run.seed_index));
}

void write_run_files(const RunResult& run, const fs::path& root) {
  const fs::path dir = run_dir(root, run);
  {
    const fs::path path = dir / "trace.csv";
    auto out = open_out(path);
    out << schema_line() << "step,concept,y_true,y_pred,kappa,boundary\n";
    std::size_t b = 0;
    for (const TraceRecord& t : run.trace.records) {
      while (b < run.drift_boundaries.size() && run.drift_boundaries[b] < t.step) ++b;
      const bool boundary = b < run.drift_boundaries.size() && run.drift_boundaries[b] == t.step;
      out << t.step << ',' << t.concept_id << ',' << t.truth << ',' << t.predicted << ','
          << num(t.kappa) << ',' << (boundary ? 1 : 0) << '\n';
    }
    finish(out, path);
  }
  {
    const fs::path path = dir / "kmatrix.json";
    json j = run_json(run);
    j["schema_version"] = kSchemaVersion;
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    finish(out, path);
  }
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const fs::path& path) {
  auto out = open_out(path);
  out << schema_line() << "strategy,scenario,k_avg_mean,k_avg_std,bwt_mean,bwt_std,aaa_mean,aaa_std\n";
  for (const SummaryRow& r : rows) {
    out << r.strategy << ',' << r.scenario << ',' << num(r.k_avg.mean) << ',' << num(r.k_avg.std)
        << ',' << num(r.bwt.mean) << ',' << num(r.bwt.std) << ',' << num(r.aaa.mean) << ','
        << num(r.aaa.std) << '\n';
  }
  finish(out, path);
}

void emit_report(const std::vector<RunResult>& runs, const fs::path& out_dir) {
  if (runs.empty()) throw std::invalid_argument("emit_report: no runs");
  fs::create_directories(out_dir);

  {
    const fs::path path = out_dir / "run_status.csv";
    auto out = open_out(path);
    out << schema_line() << "strategy,scenario,seed_index,seed,status,message\n";
    for (const RunResult& r : runs) {
      out << r.strategy << ',' << r.scenario << ',' << r.seed_index << ',' << r.seed << ','
          << (r.ok ? "ok" : "failed") << ',' << sanitize(r.error) << '\n';
    }
    finish(out, path);
  }

  std::vector<RunResult> ok;
  std::copy_if(runs.begin(), runs.end(), std::back_inserter(ok), [](const RunResult& r) { return r.ok; });

  {
    const fs::path path = out_dir / "prequential.csv";
    auto out = open_out(path);
    out << schema_line() << "strategy,scenario,seed,step,concept,y_true,y_pred,kappa,boundary\n";
    for (const RunResult& r : ok) {
      std::size_t b = 0;
      for (const TraceRecord& t : r.trace.records) {
        while (b < r.drift_boundaries.size() && r.drift_boundaries[b] < t.step) ++b;
        const bool boundary = b < r.drift_boundaries.size() && r.drift_boundaries[b] == t.step;
        out << r.strategy << ',' << r.scenario << ',' << r.seed << ',' << t.step << ','
            << t.concept_id << ',' << t.truth << ',' << t.predicted << ',' << num(t.kappa) << ','
            << (boundary ? 1 : 0) << '\n';
      }
    }
    finish(out, path);
  }
  {
    const fs::path path = out_dir / "clmatrix.json";
    json j{{"schema_version", kSchemaVersion}, {"runs", json::array()}};
    for (const RunResult& r : ok) j["runs"].push_back(run_json(r));
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    finish(out, path);
  }
  if (ok.empty()) return;
  write_summary_csv(aggregate_runs(ok), out_dir / "summary.csv");

  std::vector<std::string> scenarios;
  for (const RunResult& r : ok) {
    if (std::find(scenarios.begin(), scenarios.end(), r.scenario) == scenarios.end()) {
      scenarios.push_back(r.scenario);
    }
  }
  for (const std::string& scenario : scenarios) {
    std::vector<KappaSeries> series;
    std::vector<std::int64_t> boundaries;
    std::map<std::string, std::size_t> index;
    std::vector<std::size_t> counts;
    for (const RunResult& r : ok) {
      if (r.scenario != scenario) continue;
      if (series.empty()) boundaries = r.drift_boundaries;
      auto [it, fresh] = index.emplace(r.strategy, series.size());
      if (fresh) {
        series.push_back({r.strategy, std::vector<double>(r.trace.records.size(), 0.0)});
        counts.push_back(0);
      }
      auto& values = series[it->second].kappa;
      const std::size_t len = std::min(values.size(), r.trace.records.size());
      for (std::size_t t = 0; t < len; ++t) values[t] += r.trace.records[t].kappa;
      ++counts[it->second];
    }
    for (std::size_t s = 0; s < series.size(); ++s) {
      for (double& v : series[s].kappa) v /= static_cast<double>(counts[s]);
    }
    const fs::path path = out_dir / ("kappa_" + scenario + ".svg");
    auto out = open_out(path);
    out << render_kappa_svg("windowed kappa: " + scenario, series, boundaries);
    finish(out, path);
  }
}

std::vector<RunResult> load_runs(const fs::path& out_dir) {
  std::vector<RunResult> runs;
  for (const auto& row : read_csv(out_dir / "run_status.csv", 6)) {
    RunResult r;
    r.strategy = row[0];
    r.scenario = row[1];
    r.seed_index = std::stoull(row[2]);
    r.seed = std::stoull(row[3]);
    r.ok = row[4] == "ok";
    r.error = row[5];
    if (r.ok) {
      const fs::path dir = run_dir(out_dir, r);
      std::ifstream in(dir / "kmatrix.json");
      if (!in) throw std::runtime_error("missing " + (dir / "kmatrix.json").string());
      const json j = json::parse(in);
      const auto& m = j.at("matrix");
      const auto n = static_cast<Eigen::Index>(m.size());
      r.kappa_matrix = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c <= i; ++c) r.kappa_matrix(i, c) = m.at(i).at(c).get<double>();
      }
      r.drift_boundaries = j.at("drift_boundaries").get<std::vector<std::int64_t>>();
      for (const auto& t : read_csv(dir / "trace.csv", 6)) {
        r.trace.records.push_back({std::stoll(t[0]), std::stoi(t[1]), std::stoi(t[2]),
                                   std::stoi(t[3]), std::stod(t[4])});
      }
      r.k_avg = k_avg(r.kappa_matrix, n);
      r.bwt = n >= 2 ? bwt(r.kappa_matrix, n) : std::numeric_limits<double>::quiet_NaN();
      r.aaa = anytime_accuracy(r.trace);
    }
    runs.push_back(std::move(r));
  }
  return runs;
}

std::string render_kappa_svg(const std::string& title, const std::vector<KappaSeries>& series,
                             const std::vector<std::int64_t>& drift_boundaries) {
  constexpr double width = 960, height = 400, left = 60, right = 150, top = 40, bottom = 40;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  std::size_t steps = 1;
  for (const auto& s : series) steps = std::max(steps, s.kappa.size());
  auto x_of = [&](double step) { return left + plot_w * step / static_cast<double>(steps); };
  auto y_of = [&](double k) { return top + plot_h * (1.0 - (std::clamp(k, -1.0, 1.0) + 1.0) / 2.0); };
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" << title
      << "</text>\n";
  // axes and gridlines at kappa = -1, 0, 1
  for (double k : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    svg << "<line class=\"grid\" x1=\"" << fmt(left) << "\" y1=\"" << fmt(y_of(k)) << "\" x2=\""
        << fmt(left + plot_w) << "\" y2=\"" << fmt(y_of(k)) << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(y_of(k) + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << fmt(k)
        << "</text>\n";
  }
  svg << "<text x=\"" << fmt(left + plot_w / 2) << "\" y=\"" << fmt(height - 10)
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">step (" << steps
      << " total)</text>\n";
  for (std::int64_t b : drift_boundaries) {
    svg << "<line class=\"drift-marker\" x1=\"" << fmt(x_of(static_cast<double>(b))) << "\" y1=\""
        << fmt(top) << "\" x2=\"" << fmt(x_of(static_cast<double>(b))) << "\" y2=\""
        << fmt(top + plot_h) << "\" stroke=\"#555555\" stroke-dasharray=\"4 3\"/>\n";
  }
  const std::size_t stride = std::max<std::size_t>(1, steps / 800);
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    svg << "<polyline class=\"series\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    const auto& k = series[s].kappa;
    for (std::size_t t = 0; t < k.size(); t += stride) {
      svg << fmt(x_of(static_cast<double>(t))) << ',' << fmt(y_of(k[t])) << ' ';
    }
    if (!k.empty()) svg << fmt(x_of(static_cast<double>(k.size() - 1))) << ',' << fmt(y_of(k.back()));
    svg << "\"/>\n"
        << "<text x=\"" << fmt(left + plot_w + 12) << "\" y=\"" << fmt(top + 16 + 18.0 * static_cast<double>(s))
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color << "\">"
        << series[s].label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string plot_from_prequential(const fs::path& prequential_csv) {
  const auto rows = read_csv(prequential_csv, 9);
  if (rows.empty()) throw std::runtime_error(prequential_csv.string() + " has no rows");
  const std::string scenario = rows.front()[1];
  const std::string first_run = rows.front()[0] + "/" + rows.front()[2];

  std::vector<KappaSeries> series;
  std::vector<std::vector<double>> counts;
  std::map<std::string, std::size_t> index;
  std::vector<std::int64_t> boundaries;
  for (const auto& row : rows) {
    if (row[1] != scenario) continue;
    const auto step = static_cast<std::size_t>(std::stoll(row[3]));
    const double k = std::stod(row[7]);
    if (row[0] + "/" + row[2] == first_run && row[8] == "1") boundaries.push_back(std::stoll(row[3]));
    auto [it, fresh] = index.emplace(row[0], series.size());
    if (fresh) {
      series.push_back({row[0], {}});
      counts.emplace_back();
    }
    auto& values = series[it->second].kappa;
    auto& n = counts[it->second];
    if (values.size() <= step) {
      values.resize(step + 1, 0.0);
      n.resize(step + 1, 0.0);
    }
    values[step] += k;
    n[step] += 1.0;
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    for (std::size_t t = 0; t < series[s].kappa.size(); ++t) {
      if (counts[s][t] > 0.0) series[s].kappa[t] /= counts[s][t];
    }
  }
  return render_kappa_svg("windowed kappa: " + scenario, series, boundaries);
}

}  // namespace sclbench

#include "sclbench/config.hpp"

#include "sclbench/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace sclbench {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Entry {
  std::string value;
  std::size_t line;
};

/// Typed field readers over one section's entries.
class Section {
 public:
  Section(std::string prefix, std::map<std::string, Entry> entries)
      : prefix_(std::move(prefix)), entries_(std::move(entries)) {}

  template <typename T>
  void read(const std::string& key, T& out) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return;
    out = convert<T>(it->second, key);
    entries_.erase(it);
  }

  template <typename T>
  void read_list(const std::string& key, std::vector<T>& out) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return;
    out.clear();
    for (const auto& item : split_list(it->second.value)) {
      out.push_back(convert<T>({item, it->second.line}, key));
    }
    entries_.erase(it);
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::size_t line_of(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

  /// Any key not consumed by a read is unknown.
  void reject_leftovers() const {
    if (!entries_.empty()) {
      const auto& [key, entry] = *entries_.begin();
      throw ConfigError(full(key), entry.line, "unknown key");
    }
  }

  std::string full(const std::string& key) const { return prefix_ + "." + key; }

 private:
  template <typename T>
  T convert(const Entry& e, const std::string& key) const {
    const std::string& v = e.value;
    if constexpr (std::is_same_v<T, std::string>) {
      if (v.empty()) throw ConfigError(full(key), e.line, "empty value");
      return v;
    } else if constexpr (std::is_same_v<T, double>) {
      std::istringstream in(v);
      in.imbue(std::locale::classic());
      double x = 0.0;
      if (!(in >> x) || !(in >> std::ws).eof()) {
        throw ConfigError(full(key), e.line, "expected a number, got '" + v + "'");
      }
      return x;
    } else {
      T x{};
      const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
      if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw ConfigError(full(key), e.line, "expected an integer, got '" + v + "'");
      }
      return x;
    }
  }

  std::string prefix_;
  std::map<std::string, Entry> entries_;
};

template <typename Enum>
Enum parse_enum(const std::string& value, const std::string& key, std::size_t line,
                std::initializer_list<std::pair<const char*, Enum>> options) {
  for (const auto& [name, e] : options) {
    if (value == name) return e;
  }
  std::string allowed;
  for (const auto& [name, e] : options) allowed += (allowed.empty() ? "" : "|") + std::string(name);
  throw ConfigError(key, line, "expected one of " + allowed + ", got '" + value + "'");
}

const std::initializer_list<std::pair<const char*, StrategyKind>> kKinds = {
    {"naive", StrategyKind::naive},         {"er", StrategyKind::er},
    {"agem", StrategyKind::agem},           {"forest", StrategyKind::forest},
    {"hoeffding", StrategyKind::hoeffding}, {"nb", StrategyKind::nb},
    {"knn", StrategyKind::knn}};

const std::initializer_list<std::pair<const char*, WeightInit>> kInits = {
    {"glorot", WeightInit::glorot}, {"fan_in_uniform", WeightInit::fan_in_uniform}};

const std::initializer_list<std::pair<const char*, BoundaryMode>> kBoundaryModes = {
    {"known", BoundaryMode::known}, {"detected", BoundaryMode::detected}};

template <typename Enum>
const char* enum_name(Enum e, std::initializer_list<std::pair<const char*, Enum>> options) {
  for (const auto& [name, v] : options) {
    if (v == e) return name;
  }
  return "?";
}

void read_tree(Section& s, HoeffdingTreeParams& p) {
  s.read("grace_period", p.grace_period);
  s.read("split_delta", p.delta);
  s.read("tie_threshold", p.tie_threshold);
}

StrategyConfig read_strategy(const std::string& name, Section& s, std::size_t section_line) {
  StrategyConfig c;
  c.name = name;
  if (!s.has("kind")) throw ConfigError(s.full("kind"), section_line, "missing required key");
  const std::size_t kind_line = s.line_of("kind");
  std::string kind;
  s.read("kind", kind);
  c.kind = parse_enum(kind, s.full("kind"), kind_line, kKinds);

  if (s.has("input_dim")) {
    int dim = 0;
    const auto line = s.line_of("input_dim");
    s.read("input_dim", dim);
    if (dim <= 0) throw ConfigError(s.full("input_dim"), line, "must be positive");
    c.input_dim = dim;
  }

  switch (c.kind) {
    case StrategyKind::naive:
    case StrategyKind::er:
    case StrategyKind::agem: {
      c.ocl.strategy = c.kind == StrategyKind::naive ? OclStrategy::naive
                       : c.kind == StrategyKind::er  ? OclStrategy::replay
                                                     : OclStrategy::agem;
      s.read("hidden", c.ocl.hidden);
      s.read("learning_rate", c.ocl.learning_rate);
      s.read("momentum", c.ocl.momentum);
      s.read("memory", c.ocl.memory_capacity);
      s.read("replay", c.ocl.replay_size);
      if (s.has("init")) {
        const auto line = s.line_of("init");
        std::string init;
        s.read("init", init);
        c.ocl.init = parse_enum(init, s.full("init"), line, kInits);
      }
      if (c.ocl.hidden <= 0) throw ConfigError(s.full("hidden"), 0, "must be positive");
      break;
    }
    case StrategyKind::forest:
      s.read("trees", c.forest.trees);
      s.read("lambda", c.forest.lambda);
      s.read("detector_delta", c.forest.detector_delta);
      read_tree(s, c.forest.tree);
      if (c.forest.trees <= 0) throw ConfigError(s.full("trees"), 0, "must be positive");
      if (c.forest.lambda < 0.0) throw ConfigError(s.full("lambda"), 0, "must be non-negative");
      break;
    case StrategyKind::hoeffding:
      read_tree(s, c.tree);
      break;
    case StrategyKind::nb:
      break;
    case StrategyKind::knn:
      s.read("k", c.knn_k);
      s.read("window", c.knn_window);
      if (c.knn_k <= 0) throw ConfigError(s.full("k"), 0, "must be positive");
      if (c.knn_window == 0) throw ConfigError(s.full("window"), 0, "must be positive");
      break;
  }
  s.reject_leftovers();
  return c;
}

}  // namespace

const char* to_string(StrategyKind kind) { return enum_name(kind, kKinds); }

bool is_neural(StrategyKind kind) {
  return kind == StrategyKind::naive || kind == StrategyKind::er || kind == StrategyKind::agem;
}

ExperimentConfig parse_config_text(const std::string& text) {
  // section name -> (header line, entries); order of strategy sections is preserved
  std::vector<std::pair<std::string, std::size_t>> order;
  std::map<std::string, std::map<std::string, Entry>> sections;

  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  std::string current;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line, line_no, "malformed section header");
      current = trim(line.substr(1, line.size() - 2));
      const bool known = current == "scenario" || current == "evaluation" || current == "output" ||
                         (current.rfind("strategy.", 0) == 0 && current.size() > 9);
      if (!known) throw ConfigError(current, line_no, "unknown section");
      if (sections.count(current)) throw ConfigError(current, line_no, "duplicate section");
      sections[current];
      order.emplace_back(current, line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (current.empty()) throw ConfigError(key, line_no, "key outside of any section");
    if (key.empty()) throw ConfigError(current, line_no, "empty key");
    auto& entries = sections[current];
    if (entries.count(key)) throw ConfigError(current + "." + key, line_no, "duplicate key");
    entries[key] = {value, line_no};
  }

  ExperimentConfig cfg;
  auto take = [&](const std::string& name) {
    auto it = sections.find(name);
    return Section(name, it == sections.end() ? std::map<std::string, Entry>{} : it->second);
  };

  if (!sections.count("scenario")) throw ConfigError("scenario", 0, "missing required section");
  {
    Section s = take("scenario");
    auto& sc = cfg.scenario;
    if (!s.has("kind")) throw ConfigError("scenario.kind", 0, "missing required key");
    const auto kind_line = s.line_of("kind");
    s.read("kind", sc.kind);
    if (sc.kind != "virtual" && sc.kind != "real" && sc.kind != "csv") {
      throw ConfigError("scenario.kind", kind_line, "expected virtual|real|csv, got '" + sc.kind + "'");
    }
    if (!s.has("seeds")) throw ConfigError("scenario.seeds", 0, "missing required key");
    const auto seeds_line = s.line_of("seeds");
    s.read_list("seeds", sc.seeds);
    if (sc.seeds.empty()) throw ConfigError("scenario.seeds", seeds_line, "at least one seed required");
    const auto noise_line = s.line_of("noise");
    s.read("examples_per_concept", sc.examples_per_concept);
    s.read("test_per_concept", sc.test_per_concept);
    s.read("noise", sc.noise);
    if (!(sc.noise >= 0.0 && sc.noise < 0.5)) {
      throw ConfigError("scenario.noise", noise_line, "must lie in [0, 0.5)");
    }
    if (sc.examples_per_concept <= 0 || sc.test_per_concept <= 0) {
      throw ConfigError("scenario.examples_per_concept", 0, "counts must be positive");
    }
    if (s.has("task_order")) {
      std::vector<int> order_list;
      const auto line = s.line_of("task_order");
      s.read_list("task_order", order_list);
      std::vector<int> sorted = order_list;
      std::sort(sorted.begin(), sorted.end());
      if (sorted != std::vector<int>{0, 1, 2, 3, 4}) {
        throw ConfigError("scenario.task_order", line, "must be a permutation of 0..4");
      }
      sc.task_order = order_list;
    }
    s.read("path", sc.path);
    if (sc.kind == "csv" && sc.path.empty()) {
      throw ConfigError("scenario.path", 0, "required for csv scenarios");
    }
    s.reject_leftovers();
  }
  {
    Section s = take("evaluation");
    auto& ev = cfg.evaluation;
    s.read("window", ev.window);
    s.read("classical_batch", ev.classical_batch);
    s.read("neural_batch", ev.neural_batch);
    if (s.has("boundaries")) {
      const auto line = s.line_of("boundaries");
      std::string mode;
      s.read("boundaries", mode);
      ev.boundaries = parse_enum(mode, "evaluation.boundaries", line, kBoundaryModes);
    }
    if (ev.window < 1) throw ConfigError("evaluation.window", 0, "must be at least 1");
    if (ev.classical_batch < 1 || ev.neural_batch < 1) {
      throw ConfigError("evaluation.batch", 0, "batch sizes must be at least 1");
    }
    s.reject_leftovers();
  }
  {
    Section s = take("output");
    s.read("dir", cfg.output.dir);
    s.read("jobs", cfg.output.jobs);
    s.read("master_seed", cfg.output.master_seed);
    if (cfg.output.jobs < 1) throw ConfigError("output.jobs", 0, "must be at least 1");
    s.reject_leftovers();
  }
  for (const auto& [name, line] : order) {
    if (name.rfind("strategy.", 0) != 0) continue;
    Section s(name, sections[name]);
    cfg.strategies.push_back(read_strategy(name.substr(9), s, line));
  }
  if (cfg.strategies.empty()) throw ConfigError("strategy", 0, "at least one strategy section required");
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  auto join = [](const auto& xs) {
    std::string s;
    for (const auto& x : xs) s += (s.empty() ? "" : ", ") + std::to_string(x);
    return s;
  };
  out << "[scenario]\n"
      << "kind = " << c.scenario.kind << "\n"
      << "examples_per_concept = " << c.scenario.examples_per_concept << "\n"
      << "test_per_concept = " << c.scenario.test_per_concept << "\n"
      << "noise = " << format_double(c.scenario.noise) << "\n"
      << "seeds = " << join(c.scenario.seeds) << "\n";
  if (c.scenario.task_order) out << "task_order = " << join(*c.scenario.task_order) << "\n";
  if (!c.scenario.path.empty()) out << "path = " << c.scenario.path << "\n";

  out << "\n[evaluation]\n"
      << "window = " << c.evaluation.window << "\n"
      << "classical_batch = " << c.evaluation.classical_batch << "\n"
      << "neural_batch = " << c.evaluation.neural_batch << "\n"
      << "boundaries = " << enum_name(c.evaluation.boundaries, kBoundaryModes) << "\n";

  out << "\n[output]\n"
      << "dir = " << c.output.dir << "\n"
      << "jobs = " << c.output.jobs << "\n"
      << "master_seed = " << c.output.master_seed << "\n";

  for (const StrategyConfig& s : c.strategies) {
    out << "\n[strategy." << s.name << "]\n" << "kind = " << to_string(s.kind) << "\n";
    if (s.input_dim) out << "input_dim = " << *s.input_dim << "\n";
    auto tree = [&out](const HoeffdingTreeParams& p) {
      out << "grace_period = " << format_double(p.grace_period) << "\n"
          << "split_delta = " << format_double(p.delta) << "\n"
          << "tie_threshold = " << format_double(p.tie_threshold) << "\n";
    };
    switch (s.kind) {
      case StrategyKind::naive:
      case StrategyKind::er:
      case StrategyKind::agem:
        out << "hidden = " << s.ocl.hidden << "\n"
            << "learning_rate = " << format_double(s.ocl.learning_rate) << "\n"
            << "momentum = " << format_double(s.ocl.momentum) << "\n"
            << "memory = " << s.ocl.memory_capacity << "\n"
            << "replay = " << s.ocl.replay_size << "\n"
            << "init = " << enum_name(s.ocl.init, kInits) << "\n";
        break;
      case StrategyKind::forest:
        out << "trees = " << s.forest.trees << "\n"
            << "lambda = " << format_double(s.forest.lambda) << "\n"
            << "detector_delta = " << format_double(s.forest.detector_delta) << "\n";
        tree(s.forest.tree);
        break;
      case StrategyKind::hoeffding:
        tree(s.tree);
        break;
      case StrategyKind::nb:
        break;
      case StrategyKind::knn:
        out << "k = " << s.knn_k << "\n" << "window = " << s.knn_window << "\n";
        break;
    }
  }
  return out.str();
}

std::unique_ptr<Learner> make_learner(const StrategyConfig& s, int scenario_dim,
                                      std::uint64_t seed) {
  const int dim = s.input_dim.value_or(scenario_dim);
  switch (s.kind) {
    case StrategyKind::naive:
    case StrategyKind::er:
    case StrategyKind::agem:
      return std::make_unique<OclLearner>(dim, seed, s.ocl);
    case StrategyKind::forest:
      return std::make_unique<AdaptiveForest>(dim, seed, s.forest);
    case StrategyKind::hoeffding:
      return std::make_unique<HoeffdingTree>(dim, 2, s.tree);
    case StrategyKind::nb:
      return std::make_unique<NaiveBayes>(dim);
    case StrategyKind::knn:
      return std::make_unique<SlidingKnn>(dim, s.knn_k, s.knn_window);
  }
  throw std::invalid_argument("unknown strategy kind");
}

}  // namespace sclbench

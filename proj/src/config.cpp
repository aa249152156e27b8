#include "kvfem/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace kvfem {

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::convergence:
      return "convergence";
    case Experiment::decay:
      return "decay";
    case Experiment::cavity:
      return "cavity";
    case Experiment::single:
      return "single";
  }
  return "single";
}

ConfigError::ConfigError(int line, std::string key, const std::string& message)
    : std::runtime_error("config line " + std::to_string(line) + ", key '" + key + "': " + message),
      line_(line),
      key_(std::move(key)) {}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

struct Entry {
  int line;
  std::string value;
};

class Reader {
 public:
  Reader(std::string key, const Entry& e) : key_(std::move(key)), entry_(e) {}

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(entry_.line, key_, msg); }

  double number(std::string_view text) const {
    text = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
      fail("malformed number '" + std::string(text) + "'");
    }
    return v;
  }

  double number() const { return number(entry_.value); }

  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail("value must be positive");
    return v;
  }

  long integer() const {
    long v = 0;
    const std::string_view text = trim(entry_.value);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
      fail("malformed integer '" + std::string(text) + "'");
    }
    return v;
  }

  std::vector<std::string_view> list() const {
    auto items = split(entry_.value, ',');
    for (auto item : items) {
      if (item.empty()) fail("empty list element");
    }
    return items;
  }

  // "1/8" or "0.125" -> 8
  std::size_t mesh_size(std::string_view item) const {
    double h = 0.0;
    const auto slash = item.find('/');
    if (slash != std::string_view::npos) {
      const double num = number(item.substr(0, slash));
      const double den = number(item.substr(slash + 1));
      if (den == 0.0) fail("zero denominator in '" + std::string(item) + "'");
      h = num / den;
    } else {
      h = number(item);
    }
    if (!(h > 0.0) || h > 1.0) fail("mesh size '" + std::string(item) + "' must lie in (0, 1]");
    const double inv = 1.0 / h;
    const double n = std::round(inv);
    if (std::abs(inv - n) > 1e-9 * n) fail("mesh size '" + std::string(item) + "' is not 1/n for an integer n");
    return static_cast<std::size_t>(n);
  }

  int line() const { return entry_.line; }

 private:
  std::string key_;
  const Entry& entry_;
};

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{"experiment", "kappa_list", "nu",      "h_list",  "k_rule",
                                          "T",          "picard_tol", "max_iters", "output_dir", "problem"};
  return keys;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  std::map<std::string, Entry> entries;
  int line_no = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, std::string(line), "expected key=value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (!known_keys().contains(key)) throw ConfigError(line_no, key, "unknown key");
    if (entries.contains(key)) throw ConfigError(line_no, key, "duplicate key");
    if (value.empty()) throw ConfigError(line_no, key, "missing value");
    entries.emplace(key, Entry{line_no, value});
  }

  // A trailing newline does not start another line.
  const int end_line = (!text.empty() && text.back() == '\n') ? std::max(line_no - 1, 1) : line_no;
  const auto require = [&](const std::string& key) -> const Entry& {
    const auto it = entries.find(key);
    if (it == entries.end()) throw ConfigError(end_line, key, "missing required key");
    return it->second;
  };

  RunConfig cfg;
  {
    const Entry& e = require("experiment");
    const Reader r("experiment", e);
    if (e.value == "convergence") {
      cfg.experiment = Experiment::convergence;
    } else if (e.value == "decay") {
      cfg.experiment = Experiment::decay;
    } else if (e.value == "cavity") {
      cfg.experiment = Experiment::cavity;
    } else if (e.value == "single") {
      cfg.experiment = Experiment::single;
    } else {
      r.fail("expected one of convergence, decay, cavity, single");
    }
  }
  {
    const Reader r("kappa_list", require("kappa_list"));
    for (auto item : r.list()) {
      const double k = r.number(item);
      if (k < 0.0) r.fail("kappa must be non-negative");
      cfg.kappa_list.push_back(k);
    }
  }
  {
    const Reader r("h_list", require("h_list"));
    for (auto item : r.list()) cfg.h_list.push_back(r.mesh_size(item));
  }
  {
    const Entry& e = require("k_rule");
    const Reader r("k_rule", e);
    if (e.value == "h") {
      cfg.k_rule.kind = StepRule::Kind::h;
    } else if (e.value == "h2") {
      cfg.k_rule.kind = StepRule::Kind::h2;
    } else if (e.value.rfind("fixed:", 0) == 0) {
      cfg.k_rule.kind = StepRule::Kind::fixed;
      cfg.k_rule.fixed_step = r.number(std::string_view(e.value).substr(6));
      if (!(cfg.k_rule.fixed_step > 0.0)) r.fail("fixed time step must be positive");
    } else {
      r.fail("expected h, h2 or fixed:<value>, got '" + e.value + "'");
    }
  }
  if (auto it = entries.find("nu"); it != entries.end()) cfg.nu = Reader("nu", it->second).positive();
  if (auto it = entries.find("T"); it != entries.end()) cfg.T = Reader("T", it->second).positive();
  if (auto it = entries.find("picard_tol"); it != entries.end()) {
    cfg.solver.picard_tol = Reader("picard_tol", it->second).positive();
  }
  if (auto it = entries.find("max_iters"); it != entries.end()) {
    const Reader r("max_iters", it->second);
    const long v = r.integer();
    if (v < 1) r.fail("max_iters must be at least 1");
    cfg.solver.max_iters = static_cast<int>(v);
  }
  if (auto it = entries.find("output_dir"); it != entries.end()) cfg.output_dir = it->second.value;
  if (auto it = entries.find("problem"); it != entries.end()) {
    const Reader r("problem", it->second);
    if (cfg.experiment != Experiment::single) r.fail("only the single experiment takes a problem");
    const std::string& v = it->second.value;
    if (v != "manufactured" && v != "decay" && v != "cavity") r.fail("expected manufactured, decay or cavity");
    cfg.problem = v;
  }

  // Experiment-specific shape checks.
  const Entry& h_entry = entries.at("h_list");
  if (cfg.experiment == Experiment::convergence) {
    for (std::size_t i = 1; i < cfg.h_list.size(); ++i) {
      if (cfg.h_list[i] != 2 * cfg.h_list[i - 1]) {
        throw ConfigError(h_entry.line, "h_list", "convergence meshes must halve h at every entry");
      }
    }
  } else if (cfg.h_list.size() != 1) {
    throw ConfigError(h_entry.line, "h_list", "this experiment takes exactly one mesh size");
  }
  if (cfg.experiment == Experiment::single && cfg.kappa_list.size() != 1) {
    throw ConfigError(entries.at("kappa_list").line, "kappa_list", "single takes exactly one kappa");
  }
  for (std::size_t n : cfg.h_list) {
    const double k = cfg.k_rule.step_for(n);
    const double steps = std::round(cfg.T / k);
    if (steps < 1.0 || std::abs(steps * k - cfg.T) > 1e-12) {
      throw ConfigError(entries.at("k_rule").line, "k_rule",
                        "final time T is not an integer multiple of the time step for h = 1/" + std::to_string(n));
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace kvfem

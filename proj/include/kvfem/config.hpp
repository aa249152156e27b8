#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kvfem/analysis.hpp"
#include "kvfem/timestepper.hpp"

namespace kvfem {

enum class Experiment { convergence, decay, cavity, single };

std::string to_string(Experiment e);

/// Parameters of one CLI invocation.
struct RunConfig {
  Experiment experiment = Experiment::single;
  std::vector<double> kappa_list;
  double nu = 1.0;
  std::vector<std::size_t> h_list;  // cells per side, h = 1 / n
  StepRule k_rule;
  double T = 1.0;
  NonlinearSolveConfig solver;
  std::filesystem::path output_dir = ".";
  std::string problem = "manufactured";  // used by `single`
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, std::string key, const std::string& message);

  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

/// Flat `key=value` text, one entry per line, `#` starts a comment, lists
/// are comma separated. Mesh sizes are written as h ("1/8" or "0.125").
/// Throws ConfigError naming the key and line on any problem.
RunConfig parse_config(std::string_view text);

RunConfig load_config(const std::filesystem::path& path);

}  // namespace kvfem

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "kvfem/problems.hpp"
#include "kvfem/timestepper.hpp"

namespace kvfem {

/// Final-time errors; the pressure error compares zero-mean representatives.
struct ErrorReport {
  double l2_velocity = 0.0;
  double h1_velocity = 0.0;  // L2 norm of the gradient error
  double l2_pressure = 0.0;
};

/// Cellwise degree-6 quadrature of the errors against the given fields.
ErrorReport error_norms(const State& state, const Discretization& disc, const VelocityField& velocity,
                        const VelocityGradientField& gradient, const PressureField& pressure);

/// Same, with the problem's exact solution at state.t. Throws
/// std::invalid_argument if the problem has no exact solution.
ErrorReport error_norms(const State& state, const ProblemDefinition& problem, const Discretization& disc);

struct RateRow {
  std::size_t cells_per_side = 0;  // h = 1 / cells_per_side
  double error = 0.0;
  std::optional<double> rate;  // log2(previous error / error)
};

using RateTable = std::vector<RateRow>;

/// Rates for errors on successively halved meshes. Throws
/// std::invalid_argument unless each mesh doubles the previous one.
RateTable rate_table(std::span<const std::size_t> cells_per_side, std::span<const double> errors);

/// Time-step rule: k = h, k = h^2, or a fixed k.
struct StepRule {
  enum class Kind { h, h2, fixed } kind = Kind::h2;
  double fixed_step = 0.0;

  double step_for(std::size_t cells_per_side) const;
  std::string to_string() const;
};

/// Outcome of one manufactured-solution run in a sweep.
struct SweepRun {
  std::size_t cells_per_side = 0;
  double kappa = 0.0;
  std::optional<ErrorReport> errors;  // empty when the solver failed
  std::string failure;
  int max_picard_iterations = 0;
  int accelerated_steps = 0;
  double max_divergence = 0.0;
};

struct ConvergenceResult {
  double kappa = 0.0;
  std::vector<SweepRun> runs;
  RateTable l2_velocity;
  RateTable h1_velocity;
  RateTable l2_pressure;
  bool complete() const;
};

/// Runs the manufactured problem for each mesh (h halving) up to T and
/// tabulates errors and rates. Solver failures are recorded in the run, not
/// thrown; their table rows carry NaN errors and no rates.
ConvergenceResult convergence_study(std::span<const std::size_t> cells_per_side, double kappa, double nu,
                                    const StepRule& rule, double T = 1.0, const NonlinearSolveConfig& config = {},
                                    std::size_t threads = 1);

struct EnergySample {
  double t = 0.0;
  double kinetic = 0.0;   // |U|^2
  double gradient = 0.0;  // kappa |grad U|^2
};

/// Kinetic and weighted gradient energy for each state.
std::vector<EnergySample> energy_history(std::span<const State> trajectory, const OperatorSet& ops, double kappa);
/// Same from the per-step records of a run.
std::vector<EnergySample> energy_history(std::span<const StepRecord> history, double kappa);

/// L2 distance of two velocity fields on the same discretization.
double steady_state_gap(const State& a, const State& b, const OperatorSet& ops);

}  // namespace kvfem

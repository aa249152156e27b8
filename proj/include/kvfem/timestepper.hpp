#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kvfem/assembly.hpp"
#include "kvfem/fem_space.hpp"
#include "kvfem/mesh.hpp"
#include "kvfem/problems.hpp"
#include "kvfem/sparse.hpp"

namespace kvfem {

/// Mesh, dof numbering and constant operators for one resolution.
struct Discretization {
  TriMesh mesh;
  DofMap dofs;
  OperatorSet ops;

  static Discretization structured(std::size_t cells_per_side);
};

/// Uniform partition t_n = n k of [0, T].
struct TimeGrid {
  double k = 0.0;
  double T = 0.0;
  std::size_t steps = 0;

  /// Throws std::invalid_argument unless T / k is an integer to 1e-12.
  static TimeGrid from_step(double k, double T);
  double time(std::size_t n) const { return static_cast<double>(n) * k; }
};

struct NonlinearSolveConfig {
  double picard_tol = 1e-10;
  int max_iters = 50;
  /// Keep the last LU factors and solve each new system by iterative
  /// refinement against them, refactoring only when refinement stalls.
  /// Every linear solve still meets the same backward-error tolerance.
  bool reuse_factorization = true;
  /// History depth of the Anderson-accelerated restart used when plain
  /// Picard fails within max_iters; 0 disables the restart.
  int anderson_depth = 5;

  void validate() const;
};

/// Discrete velocity and pressure at one time level.
struct State {
  std::vector<double> velocity;
  std::vector<double> pressure;
  double t = 0.0;
};

class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, double t, int iterations, double residual)
      : std::runtime_error(what), time_(t), iterations_(iterations), residual_(residual) {}

  double time() const { return time_; }
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  double time_;
  int iterations_;
  double residual_;
};

struct LinearSolveStats {
  int factorizations = 0;
  int reused_solves = 0;
  int refinement_sweeps = 0;
};

/// Builds and solves the monolithic saddle-point systems
///   [[ a M + b A + C, -B^T ], [ B, 0 ]]
/// on a fixed sparsity pattern. The first pressure unknown is pinned during
/// the solve and the pressure is returned with zero mean.
///
/// With factor reuse enabled the object caches LU factors between solves and
/// is therefore not safe to share between threads.
class SaddlePointSystem {
 public:
  /// Normwise backward error every linear solve must reach.
  static constexpr double kBackwardErrorTolerance = 1e-14;

  explicit SaddlePointSystem(const Discretization& disc, bool reuse_factorization = false);

  std::size_t size() const { return static_cast<std::size_t>(pattern_.rows()); }

  /// Unconstrained matrix; `convection` may be null.
  SparseMatrix assemble(double mass_coef, double stiffness_coef, const SparseMatrix* convection) const;

  /// Velocity boundary values at time t plus the pressure pin.
  DirichletData constraints(const ProblemDefinition& problem, double t) const;

  /// Applies constraints, factors and solves. Returns (velocity, pressure)
  /// with the pressure shifted to zero mean.
  std::pair<std::vector<double>, std::vector<double>> solve(SparseMatrix system, std::span<const double> velocity_rhs,
                                                            const DirichletData& bc);

  const LinearSolveStats& stats() const { return stats_; }

 private:
  std::vector<double> solve_linear(const SparseMatrix& system, std::span<const double> rhs);

  const Discretization* disc_;
  bool reuse_;
  std::optional<LuFactorization> cached_;
  LinearSolveStats stats_;
  SparseMatrix pattern_;
  std::vector<std::size_t> velocity_pos_;
  std::vector<std::size_t> div_pos_;
  std::vector<std::size_t> grad_pos_;
  std::shared_ptr<const SymbolicLu> symbolic_;
};

/// U^0: L2 projection of u_0 onto the discretely divergence-free velocities
/// with the boundary values at t = 0; P^0 = 0.
State initial_state(const ProblemDefinition& problem, const Discretization& disc);

struct StepDiagnostics {
  int picard_iterations = 0;
  double picard_update = 0.0;
  bool accelerated = false;  // converged only after the Anderson restart
  double divergence = 0.0;   // max |B U^n|
};

/// One backward Euler step of the Kelvin-Voigt scheme with the implicit
/// convection resolved by Picard iteration.
class BackwardEulerStepper {
 public:
  BackwardEulerStepper(const Discretization& disc, ModelParams params, double k, NonlinearSolveConfig config = {});

  /// Advances `prev` by one step. Throws NonConvergenceError if the Picard
  /// iteration stalls and SingularMatrixError for a singular system.
  State step(const State& prev, const ProblemDefinition& problem, StepDiagnostics* diag = nullptr);

  /// Unconstrained system matrix for the convection field w.
  SparseMatrix system_matrix(std::span<const double> w) const;
  /// Velocity right-hand side (1/k)(M + kappa A) U^{n-1} + F^n.
  std::vector<double> velocity_rhs(std::span<const double> previous, std::span<const double> load) const;

  const ModelParams& params() const { return params_; }
  double step_size() const { return k_; }
  const LinearSolveStats& linear_stats() const { return saddle_.stats(); }

 private:
  const Discretization* disc_;
  ModelParams params_;
  double k_;
  NonlinearSolveConfig config_;
  SaddlePointSystem saddle_;
};

struct StepRecord {
  std::size_t step = 0;
  double t = 0.0;
  double kinetic = 0.0;   // U^T M U
  double gradient = 0.0;  // U^T A U
  int picard_iterations = 0;
  double divergence = 0.0;
};

struct RunOptions {
  bool keep_trajectory = false;
};

struct RunResult {
  State final_state;
  std::vector<StepRecord> history;  // entry 0 is the initial state
  std::vector<State> trajectory;    // filled when requested, includes U^0
  int max_picard_iterations = 0;
  int accelerated_steps = 0;  // steps that needed the Anderson restart
  double max_divergence = 0.0;
  double final_increment = 0.0;  // L2 norm of U^N - U^{N-1}
  LinearSolveStats linear;
};

/// Integrates from t = 0 to T. Step failures are rethrown with the failing
/// time level in the message.
RunResult run(const ProblemDefinition& problem, const Discretization& disc, const ModelParams& params,
              const TimeGrid& grid, const NonlinearSolveConfig& config = {}, const RunOptions& options = {});

}  // namespace kvfem

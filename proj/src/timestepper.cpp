#include "kvfem/timestepper.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace kvfem {

Discretization Discretization::structured(std::size_t cells_per_side) {
  TriMesh mesh = TriMesh::structured_unit_square(cells_per_side);
  DofMap dofs(mesh);
  OperatorSet ops = assemble_operators(mesh, dofs);
  return {std::move(mesh), std::move(dofs), std::move(ops)};
}

TimeGrid TimeGrid::from_step(double k, double T) {
  if (!(k > 0.0) || !(T > 0.0)) throw std::invalid_argument("time step and final time must be positive");
  const double ratio = T / k;
  const double steps = std::round(ratio);
  if (steps < 1.0 || std::abs(steps * k - T) > 1e-12) {
    std::ostringstream msg;
    msg << "final time " << T << " is not an integer multiple of the step " << k;
    throw std::invalid_argument(msg.str());
  }
  return {k, T, static_cast<std::size_t>(steps)};
}

void NonlinearSolveConfig::validate() const {
  if (!(picard_tol > 0.0)) throw std::invalid_argument("picard_tol must be positive");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (anderson_depth < 0) throw std::invalid_argument("anderson_depth must be non-negative");
}

namespace {

constexpr int kPinnedPressure = 0;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

SaddlePointSystem::SaddlePointSystem(const Discretization& disc, bool reuse_factorization)
    : disc_(&disc), reuse_(reuse_factorization) {
  const auto& ops = disc.ops;
  if (!ops.mass.same_pattern(ops.stiffness)) {
    throw std::invalid_argument("mass and stiffness matrices must share one sparsity pattern");
  }
  const int nvel = ops.mass.rows();
  const int npres = ops.divergence.rows();
  const int n = nvel + npres;

  std::vector<Triplet> trips;
  trips.reserve(ops.mass.nnz() + 2 * ops.divergence.nnz() + 1);
  const auto moff = ops.mass.row_offsets();
  const auto mcol = ops.mass.col_indices();
  for (int r = 0; r < nvel; ++r) {
    for (int p = moff[r]; p < moff[r + 1]; ++p) trips.push_back({r, mcol[p], 0.0});
  }
  const auto boff = ops.divergence.row_offsets();
  const auto bcol = ops.divergence.col_indices();
  for (int q = 0; q < npres; ++q) {
    for (int p = boff[q]; p < boff[q + 1]; ++p) {
      trips.push_back({nvel + q, bcol[p], 0.0});
      trips.push_back({bcol[p], nvel + q, 0.0});
    }
  }
  if (npres > 0) trips.push_back({nvel + kPinnedPressure, nvel + kPinnedPressure, 0.0});
  pattern_ = SparseMatrix::from_triplets(n, n, trips);

  velocity_pos_.resize(ops.mass.nnz());
  for (int r = 0; r < nvel; ++r) {
    for (int p = moff[r]; p < moff[r + 1]; ++p) velocity_pos_[p] = static_cast<std::size_t>(pattern_.find(r, mcol[p]));
  }
  div_pos_.resize(ops.divergence.nnz());
  grad_pos_.resize(ops.divergence.nnz());
  for (int q = 0; q < npres; ++q) {
    for (int p = boff[q]; p < boff[q + 1]; ++p) {
      div_pos_[p] = static_cast<std::size_t>(pattern_.find(nvel + q, bcol[p]));
      grad_pos_[p] = static_cast<std::size_t>(pattern_.find(bcol[p], nvel + q));
    }
  }

  // Symbolic analysis on a representative constrained matrix.
  SparseMatrix sample = assemble(1.0, 1.0, nullptr);
  std::vector<double> rhs(sample.rows(), 0.0);
  DirichletData bc = velocity_dirichlet_data(disc.dofs, [](Point) { return Vec2{0.0, 0.0}; });
  if (npres > 0) {
    bc.indices.push_back(nvel + kPinnedPressure);
    bc.values.push_back(0.0);
  }
  apply_dirichlet(sample, rhs, bc);
  symbolic_ = std::make_shared<const SymbolicLu>(sample);
}

SparseMatrix SaddlePointSystem::assemble(double mass_coef, double stiffness_coef,
                                         const SparseMatrix* convection) const {
  const auto& ops = disc_->ops;
  if (convection != nullptr && !convection->same_pattern(ops.mass)) {
    throw std::invalid_argument("convection matrix does not share the velocity sparsity pattern");
  }
  SparseMatrix s = pattern_;
  auto vals = s.values();
  std::fill(vals.begin(), vals.end(), 0.0);
  const auto m = ops.mass.values();
  const auto a = ops.stiffness.values();
  if (convection != nullptr) {
    const auto c = convection->values();
    for (std::size_t e = 0; e < m.size(); ++e) vals[velocity_pos_[e]] = mass_coef * m[e] + stiffness_coef * a[e] + c[e];
  } else {
    for (std::size_t e = 0; e < m.size(); ++e) vals[velocity_pos_[e]] = mass_coef * m[e] + stiffness_coef * a[e];
  }
  const auto b = ops.divergence.values();
  for (std::size_t e = 0; e < b.size(); ++e) {
    vals[div_pos_[e]] = b[e];
    vals[grad_pos_[e]] = -b[e];
  }
  return s;
}

DirichletData SaddlePointSystem::constraints(const ProblemDefinition& problem, double t) const {
  DirichletData bc =
      velocity_dirichlet_data(disc_->dofs, [&](Point p) { return problem.boundary_velocity(p, t); });
  if (disc_->dofs.n_pressure_dofs() > 0) {
    bc.indices.push_back(static_cast<int>(disc_->dofs.n_velocity_dofs()) + kPinnedPressure);
    bc.values.push_back(0.0);
  }
  return bc;
}

std::pair<std::vector<double>, std::vector<double>> SaddlePointSystem::solve(SparseMatrix system,
                                                                           std::span<const double> velocity_rhs,
                                                                           const DirichletData& bc) {
  const std::size_t nvel = disc_->dofs.n_velocity_dofs();
  if (velocity_rhs.size() != nvel) throw std::invalid_argument("velocity right-hand side has the wrong length");
  std::vector<double> rhs(system.rows(), 0.0);
  std::copy(velocity_rhs.begin(), velocity_rhs.end(), rhs.begin());
  apply_dirichlet(system, rhs, bc);
  std::vector<double> x = solve_linear(system, rhs);

  std::vector<double> velocity(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(nvel));
  std::vector<double> pressure(x.begin() + static_cast<std::ptrdiff_t>(nvel), x.end());
  // Zero mean with respect to the cell measure.
  const auto& mesh = disc_->mesh;
  double weighted = 0.0, area = 0.0;
  for (std::size_t c = 0; c < pressure.size(); ++c) {
    const double cell_area = 0.5 * mesh.geometry(c).det;
    weighted += cell_area * pressure[c];
    area += cell_area;
  }
  if (area > 0.0) {
    const double mean = weighted / area;
    for (double& p : pressure) p -= mean;
  }
  return {std::move(velocity), std::move(pressure)};
}

std::vector<double> SaddlePointSystem::solve_linear(const SparseMatrix& system, std::span<const double> rhs) {
  constexpr int kStaleSweeps = 8;
  constexpr int kFreshSweeps = 3;
  if (reuse_ && cached_) {
    RefinedSolve r = solve_refined(*cached_, system, rhs, kBackwardErrorTolerance, kStaleSweeps);
    if (r.converged) {
      ++stats_.reused_solves;
      stats_.refinement_sweeps += r.sweeps;
      return std::move(r.x);
    }
  }
  LuFactorization lu(system, symbolic_);
  ++stats_.factorizations;
  RefinedSolve r = solve_refined(lu, system, rhs, kBackwardErrorTolerance, kFreshSweeps);
  stats_.refinement_sweeps += r.sweeps;
  if (reuse_) cached_.emplace(std::move(lu));
  return std::move(r.x);
}

State initial_state(const ProblemDefinition& problem, const Discretization& disc) {
  SaddlePointSystem saddle(disc);
  const std::vector<double> load = assemble_load(disc.mesh, disc.dofs, problem.initial_velocity);
  auto [velocity, multiplier] =
      saddle.solve(saddle.assemble(1.0, 0.0, nullptr), load, saddle.constraints(problem, 0.0));
  State s;
  s.velocity = std::move(velocity);
  s.pressure.assign(disc.dofs.n_pressure_dofs(), 0.0);
  s.t = 0.0;
  return s;
}

BackwardEulerStepper::BackwardEulerStepper(const Discretization& disc, ModelParams params, double k,
                                           NonlinearSolveConfig config)
    : disc_(&disc), params_(params), k_(k), config_(config), saddle_(disc, config.reuse_factorization) {
  params_.validate();
  config_.validate();
  if (!(k > 0.0)) throw std::invalid_argument("time step must be positive");
}

SparseMatrix BackwardEulerStepper::system_matrix(std::span<const double> w) const {
  const SparseMatrix conv = assemble_convection(disc_->mesh, disc_->dofs, w);
  const double inv_k = 1.0 / k_;
  return saddle_.assemble(inv_k, params_.kappa * inv_k + params_.nu, &conv);
}

std::vector<double> BackwardEulerStepper::velocity_rhs(std::span<const double> previous,
                                                       std::span<const double> load) const {
  const double inv_k = 1.0 / k_;
  std::vector<double> rhs(load.begin(), load.end());
  disc_->ops.mass.multiply_add(previous, rhs, inv_k);
  if (params_.kappa != 0.0) disc_->ops.stiffness.multiply_add(previous, rhs, params_.kappa * inv_k);
  return rhs;
}

namespace {

// Least-squares coefficients gamma minimizing |f - dF gamma| through the
// regularized normal equations; the history is at most a few columns deep.
std::vector<double> anderson_coefficients(const std::deque<std::vector<double>>& df, std::span<const double> f) {
  const std::size_t m = df.size();
  std::vector<std::vector<double>> gram(m, std::vector<double>(m + 1, 0.0));
  double scale = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < f.size(); ++r) s += df[i][r] * df[j][r];
      gram[i][j] = gram[j][i] = s;
    }
    double s = 0.0;
    for (std::size_t r = 0; r < f.size(); ++r) s += df[i][r] * f[r];
    gram[i][m] = s;
    scale = std::max(scale, gram[i][i]);
  }
  for (std::size_t i = 0; i < m; ++i) gram[i][i] += 1e-12 * scale;
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < m; ++i) {
      if (std::abs(gram[i][k]) > std::abs(gram[piv][k])) piv = i;
    }
    std::swap(gram[k], gram[piv]);
    if (gram[k][k] == 0.0) return std::vector<double>(m, 0.0);
    for (std::size_t i = k + 1; i < m; ++i) {
      const double factor = gram[i][k] / gram[k][k];
      for (std::size_t j = k; j <= m; ++j) gram[i][j] -= factor * gram[k][j];
    }
  }
  std::vector<double> gamma(m);
  for (std::size_t i = m; i-- > 0;) {
    double s = gram[i][m];
    for (std::size_t j = i + 1; j < m; ++j) s -= gram[i][j] * gamma[j];
    gamma[i] = s / gram[i][i];
  }
  return gamma;
}

}  // namespace

State BackwardEulerStepper::step(const State& prev, const ProblemDefinition& problem, StepDiagnostics* diag) {
  const auto& dofs = disc_->dofs;
  const double t = prev.t + k_;
  if (prev.velocity.size() != dofs.n_velocity_dofs()) throw std::invalid_argument("state has the wrong velocity size");

  std::vector<double> load;
  if (problem.zero_forcing) {
    load.assign(dofs.n_velocity_dofs(), 0.0);
  } else {
    load = assemble_load(disc_->mesh, dofs, [&](Point p) { return problem.forcing(p, t, params_); });
  }
  const std::vector<double> rhs = velocity_rhs(prev.velocity, load);
  const DirichletData bc = saddle_.constraints(problem, t);

  std::vector<double> start = prev.velocity;
  for (std::size_t k = 0; k < bc.indices.size(); ++k) {
    if (static_cast<std::size_t>(bc.indices[k]) < start.size()) start[bc.indices[k]] = bc.values[k];
  }

  int total_iterations = 0;
  double update = 0.0;
  bool diverged = false;
  // Plain Picard first; if it stalls, restart with Anderson mixing of the
  // same fixed-point map.
  for (const int depth : {0, config_.anderson_depth}) {
    if (depth < 0 || (depth == 0 && total_iterations > 0)) break;
    std::vector<double> iterate = start;
    std::deque<std::vector<double>> df, dg;
    std::vector<double> f_prev, g_prev;
    for (int it = 1; it <= config_.max_iters; ++it) {
      ++total_iterations;
      auto [velocity, pressure] = saddle_.solve(system_matrix(iterate), rhs, bc);
      if (!all_finite(velocity) || !all_finite(pressure)) {
        diverged = true;
        break;
      }
      std::vector<double> f(velocity.size());
      for (std::size_t i = 0; i < velocity.size(); ++i) f[i] = velocity[i] - iterate[i];
      update = norm2(f);
      if (update <= config_.picard_tol * std::max(1.0, norm2(velocity))) {
        State next{std::move(velocity), std::move(pressure), t};
        if (diag != nullptr) {
          diag->picard_iterations = total_iterations;
          diag->picard_update = update;
          diag->accelerated = depth > 0;
          diag->divergence = norm_inf(disc_->ops.divergence.multiply(next.velocity));
        }
        return next;
      }
      if (depth == 0) {
        iterate = std::move(velocity);
        continue;
      }
      if (!f_prev.empty()) {
        std::vector<double> dfi(f.size()), dgi(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
          dfi[i] = f[i] - f_prev[i];
          dgi[i] = velocity[i] - g_prev[i];
        }
        df.push_back(std::move(dfi));
        dg.push_back(std::move(dgi));
        if (df.size() > static_cast<std::size_t>(depth)) {
          df.pop_front();
          dg.pop_front();
        }
      }
      f_prev = f;
      g_prev = velocity;
      iterate = velocity;
      if (!df.empty()) {
        const std::vector<double> gamma = anderson_coefficients(df, f);
        for (std::size_t j = 0; j < gamma.size(); ++j) {
          for (std::size_t i = 0; i < iterate.size(); ++i) iterate[i] -= gamma[j] * dg[j][i];
        }
      }
    }
  }
  std::ostringstream msg;
  if (diverged) {
    msg << "Picard iterate became non-finite";
  } else {
    msg << "Picard iteration did not converge in " << total_iterations << " iterations (last update " << update
        << ")";
  }
  throw NonConvergenceError(msg.str(), t, total_iterations, update);
}

namespace {

StepRecord record_for(const State& s, const Discretization& disc, std::size_t step) {
  StepRecord r;
  r.step = step;
  r.t = s.t;
  r.kinetic = disc.ops.mass.bilinear(s.velocity, s.velocity);
  r.gradient = disc.ops.stiffness.bilinear(s.velocity, s.velocity);
  return r;
}

}  // namespace

RunResult run(const ProblemDefinition& problem, const Discretization& disc, const ModelParams& params,
              const TimeGrid& grid, const NonlinearSolveConfig& config, const RunOptions& options) {
  if (grid.steps == 0) throw std::invalid_argument("time grid has no steps");
  BackwardEulerStepper stepper(disc, params, grid.k, config);

  RunResult result;
  State state = initial_state(problem, disc);
  result.history.reserve(grid.steps + 1);
  result.history.push_back(record_for(state, disc, 0));
  if (options.keep_trajectory) result.trajectory.push_back(state);

  for (std::size_t n = 1; n <= grid.steps; ++n) {
    StepDiagnostics diag;
    std::vector<double> previous;
    if (n == grid.steps) previous = state.velocity;
    try {
      state = stepper.step(state, problem, &diag);
    } catch (const NonConvergenceError& e) {
      std::ostringstream msg;
      msg << "time level " << n << " (t = " << grid.time(n) << "): " << e.what();
      throw NonConvergenceError(msg.str(), e.time(), e.iterations(), e.residual());
    } catch (const SingularMatrixError& e) {
      std::ostringstream msg;
      msg << "time level " << n << " (t = " << grid.time(n) << "): " << e.what();
      throw SingularMatrixError(msg.str());
    }
    state.t = grid.time(n);
    StepRecord rec = record_for(state, disc, n);
    rec.picard_iterations = diag.picard_iterations;
    rec.divergence = diag.divergence;
    result.max_picard_iterations = std::max(result.max_picard_iterations, diag.picard_iterations);
    result.max_divergence = std::max(result.max_divergence, diag.divergence);
    if (diag.accelerated) ++result.accelerated_steps;
    result.history.push_back(rec);
    if (options.keep_trajectory) result.trajectory.push_back(state);
    if (n == grid.steps) {
      for (std::size_t i = 0; i < previous.size(); ++i) previous[i] = state.velocity[i] - previous[i];
      result.final_increment = std::sqrt(std::max(0.0, disc.ops.mass.bilinear(previous, previous)));
    }
  }
  result.final_state = std::move(state);
  result.linear = stepper.linear_stats();
  return result;
}

}  // namespace kvfem

#include "kvfem/analysis.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "parallel.hpp"

namespace kvfem {

ErrorReport error_norms(const State& state, const Discretization& disc, const VelocityField& velocity,
                        const VelocityGradientField& gradient, const PressureField& pressure) {
  const auto& mesh = disc.mesh;
  const auto& dofs = disc.dofs;
  const std::size_t nv = dofs.n_velocity_scalar_dofs();
  if (state.velocity.size() != 2 * nv || state.pressure.size() != dofs.n_pressure_dofs()) {
    throw std::invalid_argument("state does not match the discretization");
  }
  const QuadratureRule& rule = quadrature(kErrorQuadratureDegree);
  std::vector<P2BasisEval> basis;
  for (const Point& p : rule.points) basis.push_back(p2_basis_at(p));

  // Means of both pressures, for the zero-mean representatives.
  double exact_mean = 0.0, discrete_mean = 0.0, area = 0.0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const AffineMap map = mesh.geometry(c);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      exact_mean += rule.weights[q] * map.det * pressure(map.to_physical(rule.points[q]), state.t);
    }
    discrete_mean += 0.5 * map.det * state.pressure[c];
    area += 0.5 * map.det;
  }
  exact_mean /= area;
  discrete_mean /= area;

  double l2 = 0.0, h1 = 0.0, pl2 = 0.0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const AffineMap map = mesh.geometry(c);
    const auto& cd = dofs.cell_dofs(c);
    const double ph = state.pressure[c] - discrete_mean;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double w = rule.weights[q] * map.det;
      const Point x = map.to_physical(rule.points[q]);
      const auto& b = basis[q];
      Vec2 uh{};
      Mat2 guh{};
      for (std::size_t i = 0; i < kP2NodesPerCell; ++i) {
        const double ux = state.velocity[cd[i]];
        const double uy = state.velocity[nv + cd[i]];
        uh.x += ux * b.values[i];
        uh.y += uy * b.values[i];
        const auto g = map.physical_gradient(b.gradients[i]);
        for (std::size_t d = 0; d < 2; ++d) {
          guh[0][d] += ux * g[d];
          guh[1][d] += uy * g[d];
        }
      }
      const Vec2 u = velocity(x, state.t);
      const Mat2 gu = gradient(x, state.t);
      l2 += w * ((u.x - uh.x) * (u.x - uh.x) + (u.y - uh.y) * (u.y - uh.y));
      for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t d = 0; d < 2; ++d) h1 += w * (gu[r][d] - guh[r][d]) * (gu[r][d] - guh[r][d]);
      }
      const double dp = (pressure(x, state.t) - exact_mean) - ph;
      pl2 += w * dp * dp;
    }
  }
  return {std::sqrt(l2), std::sqrt(h1), std::sqrt(pl2)};
}

ErrorReport error_norms(const State& state, const ProblemDefinition& problem, const Discretization& disc) {
  if (!problem.has_exact_solution()) {
    throw std::invalid_argument("problem '" + problem.name + "' has no exact solution");
  }
  return error_norms(state, disc, *problem.exact_velocity, *problem.exact_velocity_gradient, *problem.exact_pressure);
}

RateTable rate_table(std::span<const std::size_t> cells_per_side, std::span<const double> errors) {
  if (cells_per_side.size() != errors.size()) throw std::invalid_argument("mesh and error lists differ in length");
  RateTable table;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (i > 0 && cells_per_side[i] != 2 * cells_per_side[i - 1]) {
      throw std::invalid_argument("mesh sizes must halve h at every row");
    }
    RateRow row{cells_per_side[i], errors[i], std::nullopt};
    if (i > 0 && std::isfinite(errors[i - 1]) && std::isfinite(errors[i]) && errors[i] > 0.0 && errors[i - 1] > 0.0) {
      row.rate = std::log2(errors[i - 1] / errors[i]);
    }
    table.push_back(row);
  }
  return table;
}

double StepRule::step_for(std::size_t cells_per_side) const {
  const double h = 1.0 / static_cast<double>(cells_per_side);
  switch (kind) {
    case Kind::h:
      return h;
    case Kind::h2:
      return h * h;
    case Kind::fixed:
      return fixed_step;
  }
  return h;
}

std::string StepRule::to_string() const {
  switch (kind) {
    case Kind::h:
      return "h";
    case Kind::h2:
      return "h2";
    case Kind::fixed: {
      std::ostringstream s;
      s << "fixed:" << fixed_step;
      return s.str();
    }
  }
  return "h";
}

bool ConvergenceResult::complete() const {
  for (const auto& r : runs) {
    if (!r.errors) return false;
  }
  return true;
}

namespace {

SweepRun run_manufactured(std::size_t n, double kappa, double nu, const StepRule& rule, double T,
                          const NonlinearSolveConfig& config) {
  SweepRun out;
  out.cells_per_side = n;
  out.kappa = kappa;
  try {
    const Discretization disc = Discretization::structured(n);
    const ProblemDefinition problem = manufactured_problem();
    const TimeGrid grid = TimeGrid::from_step(rule.step_for(n), T);
    const RunResult res = run(problem, disc, {kappa, nu}, grid, config);
    out.errors = error_norms(res.final_state, problem, disc);
    out.max_picard_iterations = res.max_picard_iterations;
    out.accelerated_steps = res.accelerated_steps;
    out.max_divergence = res.max_divergence;
  } catch (const NonConvergenceError& e) {
    out.failure = std::string("nonlinear solver did not converge: ") + e.what();
  } catch (const SingularMatrixError& e) {
    out.failure = std::string("singular system: ") + e.what();
  }
  return out;
}

}  // namespace

ConvergenceResult convergence_study(std::span<const std::size_t> cells_per_side, double kappa, double nu,
                                    const StepRule& rule, double T, const NonlinearSolveConfig& config,
                                    std::size_t threads) {
  std::vector<std::size_t> meshes(cells_per_side.begin(), cells_per_side.end());
  // Validates the halving sequence before any work is done.
  rate_table(meshes, std::vector<double>(meshes.size(), 1.0));

  ConvergenceResult result;
  result.kappa = kappa;
  result.runs.resize(meshes.size());

  detail::parallel_for(meshes.size(), threads,
                       [&](std::size_t i) { result.runs[i] = run_manufactured(meshes[i], kappa, nu, rule, T, config); });

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> l2, h1, pl2;
  for (const auto& r : result.runs) {
    l2.push_back(r.errors ? r.errors->l2_velocity : nan);
    h1.push_back(r.errors ? r.errors->h1_velocity : nan);
    pl2.push_back(r.errors ? r.errors->l2_pressure : nan);
  }
  result.l2_velocity = rate_table(meshes, l2);
  result.h1_velocity = rate_table(meshes, h1);
  result.l2_pressure = rate_table(meshes, pl2);
  return result;
}

std::vector<EnergySample> energy_history(std::span<const State> trajectory, const OperatorSet& ops, double kappa) {
  std::vector<EnergySample> out;
  out.reserve(trajectory.size());
  for (const State& s : trajectory) {
    out.push_back({s.t, ops.mass.bilinear(s.velocity, s.velocity), kappa * ops.stiffness.bilinear(s.velocity, s.velocity)});
  }
  return out;
}

std::vector<EnergySample> energy_history(std::span<const StepRecord> history, double kappa) {
  std::vector<EnergySample> out;
  out.reserve(history.size());
  for (const StepRecord& r : history) out.push_back({r.t, r.kinetic, kappa * r.gradient});
  return out;
}

double steady_state_gap(const State& a, const State& b, const OperatorSet& ops) {
  if (a.velocity.size() != b.velocity.size() || a.velocity.size() != static_cast<std::size_t>(ops.mass.rows())) {
    throw std::invalid_argument("states do not share the velocity space");
  }
  std::vector<double> diff(a.velocity.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a.velocity[i] - b.velocity[i];
  return std::sqrt(std::max(0.0, ops.mass.bilinear(diff, diff)));
}

}  // namespace kvfem

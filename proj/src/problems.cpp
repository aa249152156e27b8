#include "kvfem/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace kvfem {

void ModelParams::validate() const {
  if (!(nu > 0.0)) throw std::invalid_argument("viscosity nu must be positive");
  if (!(kappa >= 0.0)) throw std::invalid_argument("retardation time kappa must be non-negative");
}

namespace {

// F(s) = s^2 (s-1)^2 and G(s) = s (s-1) (2s-1) = F'(s) / 2.
double F(double s) { return s * s * (s - 1.0) * (s - 1.0); }
double dF(double s) { return 2.0 * s * (s - 1.0) * (2.0 * s - 1.0); }
double d2F(double s) { return 12.0 * s * s - 12.0 * s + 2.0; }
double G(double s) { return s * (s - 1.0) * (2.0 * s - 1.0); }
double dG(double s) { return 6.0 * s * s - 6.0 * s + 1.0; }
double d2G(double s) { return 12.0 * s - 6.0; }

// Spatial profile U(x, y) of the manufactured velocity and its derivatives.
Vec2 profile(Point p) { return {10.0 * F(p.x) * G(p.y), -10.0 * G(p.x) * F(p.y)}; }

Mat2 profile_gradient(Point p) {
  return {{{10.0 * dF(p.x) * G(p.y), 10.0 * F(p.x) * dG(p.y)},
           {-10.0 * dG(p.x) * F(p.y), -10.0 * G(p.x) * dF(p.y)}}};
}

Vec2 profile_laplacian(Point p) {
  return {10.0 * (d2F(p.x) * G(p.y) + F(p.x) * d2G(p.y)), -10.0 * (d2G(p.x) * F(p.y) + G(p.x) * d2F(p.y))};
}

Vec2 zero_velocity(Point, double) { return {0.0, 0.0}; }

}  // namespace

Vec2 manufactured_forcing(Point p, double t, const ModelParams& params) {
  const double c = std::cos(t);
  const double s = std::sin(t);
  const Vec2 u = profile(p);
  const Mat2 g = profile_gradient(p);
  const Vec2 lap = profile_laplacian(p);
  // u = c U, u_t = -s U, lap u_t = -s lap U, (u.grad)u = c^2 (U.grad)U.
  const Vec2 conv{u.x * g[0][0] + u.y * g[0][1], u.x * g[1][0] + u.y * g[1][1]};
  const Vec2 grad_p{40.0 * p.y * c, 40.0 * p.x * c};
  return {-s * u.x + c * c * conv.x + params.kappa * s * lap.x - params.nu * c * lap.x + grad_p.x,
          -s * u.y + c * c * conv.y + params.kappa * s * lap.y - params.nu * c * lap.y + grad_p.y};
}

ProblemDefinition manufactured_problem() {
  ProblemDefinition pd;
  pd.name = "manufactured";
  pd.initial_velocity = [](Point p) { return profile(p); };
  pd.boundary_velocity = zero_velocity;
  pd.forcing = manufactured_forcing;
  pd.exact_velocity = [](Point p, double t) {
    const Vec2 u = profile(p);
    const double c = std::cos(t);
    return Vec2{c * u.x, c * u.y};
  };
  pd.exact_velocity_gradient = [](Point p, double t) {
    Mat2 g = profile_gradient(p);
    const double c = std::cos(t);
    for (auto& row : g) {
      for (double& v : row) v *= c;
    }
    return g;
  };
  pd.exact_pressure = [](Point p, double t) { return (40.0 * p.x * p.y - 10.0) * std::cos(t); };
  pd.suggested_params = {1.0, 1.0};
  pd.suggested_final_time = 1.0;
  return pd;
}

ProblemDefinition decay_problem() {
  ProblemDefinition pd;
  pd.name = "decay";
  pd.initial_velocity = [](Point p) { return profile(p); };
  pd.boundary_velocity = zero_velocity;
  pd.forcing = [](Point, double, const ModelParams&) { return Vec2{0.0, 0.0}; };
  pd.zero_forcing = true;
  pd.suggested_params = {1.0, 1.0};
  pd.suggested_final_time = 4.0;
  return pd;
}

ProblemDefinition cavity_problem() {
  ProblemDefinition pd;
  pd.name = "cavity";
  pd.initial_velocity = [](Point) { return Vec2{0.0, 0.0}; };
  pd.boundary_velocity = [](Point p, double) { return p.y >= 1.0 ? Vec2{1.0, 0.0} : Vec2{0.0, 0.0}; };
  pd.forcing = [](Point, double, const ModelParams&) { return Vec2{0.0, 0.0}; };
  pd.zero_forcing = true;
  pd.suggested_params = {1.0, 1.0};
  pd.suggested_final_time = 40.0;
  return pd;
}

}  // namespace kvfem

#pragma once

#include <functional>
#include <optional>
#include <string>

#include "kvfem/types.hpp"

namespace kvfem {

using VelocityField = std::function<Vec2(Point, double)>;
using VelocityGradientField = std::function<Mat2(Point, double)>;
using PressureField = std::function<double(Point, double)>;
using ForcingField = std::function<Vec2(Point, double, const ModelParams&)>;

/// Data of one Kelvin-Voigt initial-boundary value problem on the unit square.
struct ProblemDefinition {
  std::string name;
  std::function<Vec2(Point)> initial_velocity;
  VelocityField boundary_velocity;
  /// Body force; it depends on the model coefficients for manufactured data.
  ForcingField forcing;
  bool zero_forcing = false;

  std::optional<VelocityField> exact_velocity;
  std::optional<VelocityGradientField> exact_velocity_gradient;
  /// Zero-mean representative of the exact pressure.
  std::optional<PressureField> exact_pressure;

  ModelParams suggested_params;
  double suggested_final_time = 1.0;

  bool has_exact_solution() const { return exact_velocity && exact_velocity_gradient && exact_pressure; }
};

/// Smooth polynomial-in-space solution with cos(t) time dependence:
///   u1 =  10 x^2 (x-1)^2 y (y-1) (2y-1) cos t
///   u2 = -10 y^2 (y-1)^2 x (x-1) (2x-1) cos t
///   p  = (40 x y - 10) cos t
/// The forcing is the closed-form residual of the momentum equation.
ProblemDefinition manufactured_problem();

/// Force-free decay from the spatial profile of the manufactured velocity.
ProblemDefinition decay_problem();

/// Lid-driven cavity: u = (1, 0) on y = 1 (corners included), no-slip elsewhere.
ProblemDefinition cavity_problem();

/// Momentum residual u_t + (u.grad)u - kappa lap u_t - nu lap u + grad p of
/// the manufactured fields, from hand-derived derivatives.
Vec2 manufactured_forcing(Point p, double t, const ModelParams& params);

}  // namespace kvfem

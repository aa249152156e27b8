#pragma once

#include <array>
#include <cstddef>

namespace kvfem {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Row-major 2x2 matrix; for velocity gradients entry (c, d) is d u_c / d x_d.
using Mat2 = std::array<std::array<double, 2>, 2>;

/// Physical coefficients of the Kelvin-Voigt model. kappa = 0 is Navier-Stokes.
struct ModelParams {
  double kappa = 0.0;  // retardation time
  double nu = 1.0;     // kinematic viscosity

  void validate() const;
};

}  // namespace kvfem

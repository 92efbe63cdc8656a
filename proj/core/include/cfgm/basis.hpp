#pragma once

#include <Eigen/Core>
#include <vector>

namespace cfgm {

enum class BasisKind { Fourier, BSpline };

/// Fixed basis system on a closed interval.
///
/// Fourier bases are ordered constant, sin/cos pairs of increasing frequency,
/// each scaled to unit L2 norm on the domain. B-splines are clamped with
/// equally spaced interior knots.
struct BasisSystem {
  BasisKind kind = BasisKind::Fourier;
  int size = 0;  // R
  double lo = 0.0;
  double hi = 1.0;
  int order = 4;               // B-spline order (degree + 1)
  std::vector<double> knots;   // B-spline full knot vector

  static BasisSystem fourier(int R, double lo = 0.0, double hi = 1.0);
  static BasisSystem bspline(int R, int order = 4, double lo = 0.0,
                             double hi = 1.0);
};

/// Smoothed curve: basis coefficients plus the system they refer to.
struct SmoothCurve {
  Eigen::VectorXd coef;
  BasisSystem basis;
};

/// Evaluate all basis functions on a grid; column m holds function m.
/// Throws if any grid point lies outside the domain.
Eigen::MatrixXd eval_basis(const BasisSystem& b, const Eigen::VectorXd& grid);

/// Second derivatives of all basis functions on a grid.
Eigen::MatrixXd eval_basis_d2(const BasisSystem& b, const Eigen::VectorXd& grid);

/// Roughness penalty matrix P_rs = integral of psi_r'' psi_s'', computed by
/// trapezoid quadrature on a 512-point internal grid.
Eigen::MatrixXd roughness_penalty(const BasisSystem& b);

/// Penalized least-squares fit of a discretely observed series:
/// minimizes sum_l (y_l - sum_r theta_r psi_r(t_l))^2 + roughness * theta'P theta.
/// With roughness = 0 the design must have full column rank.
SmoothCurve smooth_curve(const std::vector<double>& times,
                         const std::vector<double>& values,
                         const BasisSystem& b, double roughness = 0.0);

/// Pointwise evaluation of a smoothed curve.
Eigen::VectorXd eval_curve(const SmoothCurve& c, const Eigen::VectorXd& grid);

}  // namespace cfgm

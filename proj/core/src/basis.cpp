#include "cfgm/basis.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>
#include <stdexcept>

namespace cfgm {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_domain(const BasisSystem& b, const Eigen::VectorXd& grid) {
  const double tol = 1e-12 * (b.hi - b.lo);
  for (int g = 0; g < grid.size(); ++g)
    if (grid[g] < b.lo - tol || grid[g] > b.hi + tol)
      throw std::domain_error("basis: grid point " + std::to_string(grid[g]) +
                              " outside domain [" + std::to_string(b.lo) + ", " +
                              std::to_string(b.hi) + "]");
}

// Cox-de Boor value of B-spline `i` of order `k` over knot vector `t`.
double bspline_value(const std::vector<double>& t, int i, int k, double x) {
  if (k == 1) {
    // Half-open support, closed at the right end of the last interval.
    const bool last = static_cast<size_t>(i + 2) == t.size() ||
                      t[i + 1] == t.back();
    if (last) return (x >= t[i] && x <= t[i + 1] && t[i] < t[i + 1]) ? 1.0 : 0.0;
    return (x >= t[i] && x < t[i + 1]) ? 1.0 : 0.0;
  }
  double left = 0.0, right = 0.0;
  const double dl = t[i + k - 1] - t[i];
  if (dl > 0.0) left = (x - t[i]) / dl * bspline_value(t, i, k - 1, x);
  const double dr = t[i + k] - t[i + 1];
  if (dr > 0.0) right = (t[i + k] - x) / dr * bspline_value(t, i + 1, k - 1, x);
  return left + right;
}

// First derivative via the standard difference of lower-order splines.
double bspline_deriv(const std::vector<double>& t, int i, int k, double x,
                     int nu) {
  if (nu == 0) return bspline_value(t, i, k, x);
  if (k <= 1) return 0.0;
  double left = 0.0, right = 0.0;
  const double dl = t[i + k - 1] - t[i];
  if (dl > 0.0) left = bspline_deriv(t, i, k - 1, x, nu - 1) / dl;
  const double dr = t[i + k] - t[i + 1];
  if (dr > 0.0) right = bspline_deriv(t, i + 1, k - 1, x, nu - 1) / dr;
  return (k - 1) * (left - right);
}

}  // namespace

BasisSystem BasisSystem::fourier(int R, double lo, double hi) {
  if (R < 1) throw std::invalid_argument("basis: size must be >= 1");
  if (!(hi > lo)) throw std::invalid_argument("basis: empty domain");
  BasisSystem b;
  b.kind = BasisKind::Fourier;
  b.size = R;
  b.lo = lo;
  b.hi = hi;
  return b;
}

BasisSystem BasisSystem::bspline(int R, int order, double lo, double hi) {
  if (order < 1) throw std::invalid_argument("basis: order must be >= 1");
  if (R < order)
    throw std::invalid_argument("basis: B-spline size must be >= order");
  if (!(hi > lo)) throw std::invalid_argument("basis: empty domain");
  BasisSystem b;
  b.kind = BasisKind::BSpline;
  b.size = R;
  b.lo = lo;
  b.hi = hi;
  b.order = order;
  // Clamped knots: `order` copies at each end, R - order equally spaced inside.
  const int interior = R - order;
  for (int i = 0; i < order; ++i) b.knots.push_back(lo);
  for (int i = 1; i <= interior; ++i)
    b.knots.push_back(lo + (hi - lo) * i / (interior + 1));
  for (int i = 0; i < order; ++i) b.knots.push_back(hi);
  return b;
}

Eigen::MatrixXd eval_basis(const BasisSystem& b, const Eigen::VectorXd& grid) {
  check_domain(b, grid);
  Eigen::MatrixXd out(grid.size(), b.size);
  if (b.kind == BasisKind::Fourier) {
    const double T = b.hi - b.lo;
    const double c0 = 1.0 / std::sqrt(T);
    const double amp = std::sqrt(2.0 / T);
    for (int g = 0; g < grid.size(); ++g) {
      const double u = (grid[g] - b.lo) / T;
      out(g, 0) = c0;
      for (int r = 1; r < b.size; ++r) {
        const int freq = (r + 1) / 2;
        const double arg = 2.0 * kPi * freq * u;
        out(g, r) = amp * (r % 2 == 1 ? std::sin(arg) : std::cos(arg));
      }
    }
  } else {
    for (int g = 0; g < grid.size(); ++g)
      for (int r = 0; r < b.size; ++r)
        out(g, r) = bspline_value(b.knots, r, b.order, grid[g]);
  }
  return out;
}

Eigen::MatrixXd eval_basis_d2(const BasisSystem& b, const Eigen::VectorXd& grid) {
  check_domain(b, grid);
  Eigen::MatrixXd out(grid.size(), b.size);
  if (b.kind == BasisKind::Fourier) {
    const double T = b.hi - b.lo;
    const double amp = std::sqrt(2.0 / T);
    for (int g = 0; g < grid.size(); ++g) {
      const double u = (grid[g] - b.lo) / T;
      out(g, 0) = 0.0;
      for (int r = 1; r < b.size; ++r) {
        const int freq = (r + 1) / 2;
        const double w = 2.0 * kPi * freq / T;
        const double arg = 2.0 * kPi * freq * u;
        out(g, r) = -w * w * amp * (r % 2 == 1 ? std::sin(arg) : std::cos(arg));
      }
    }
  } else {
    for (int g = 0; g < grid.size(); ++g)
      for (int r = 0; r < b.size; ++r)
        out(g, r) = bspline_deriv(b.knots, r, b.order, grid[g], 2);
  }
  return out;
}

Eigen::MatrixXd roughness_penalty(const BasisSystem& b) {
  const int G = 512;
  Eigen::VectorXd grid(G);
  for (int g = 0; g < G; ++g)
    grid[g] = b.lo + (b.hi - b.lo) * g / (G - 1.0);
  const Eigen::MatrixXd D2 = eval_basis_d2(b, grid);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(G);
  for (int g = 0; g + 1 < G; ++g) {
    const double h = (grid[g + 1] - grid[g]) / 2.0;
    w[g] += h;
    w[g + 1] += h;
  }
  return D2.transpose() * w.asDiagonal() * D2;
}

SmoothCurve smooth_curve(const std::vector<double>& times,
                         const std::vector<double>& values,
                         const BasisSystem& b, double roughness) {
  if (times.size() != values.size())
    throw std::invalid_argument("basis: times/values length mismatch");
  if (roughness < 0.0)
    throw std::invalid_argument("basis: roughness must be >= 0");
  const int L = static_cast<int>(times.size());
  Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(times.data(), L);
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(values.data(), L);
  const Eigen::MatrixXd Phi = eval_basis(b, t);

  SmoothCurve c;
  c.basis = b;
  if (roughness == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Phi);
    if (qr.rank() < b.size)
      throw std::runtime_error(
          "basis: design is rank-deficient with roughness 0; use a positive "
          "roughness penalty or a smaller basis");
    c.coef = qr.solve(y);
  } else {
    const Eigen::MatrixXd P = roughness_penalty(b);
    Eigen::MatrixXd lhs = Phi.transpose() * Phi + roughness * P;
    c.coef = Eigen::LDLT<Eigen::MatrixXd>(lhs).solve(Phi.transpose() * y);
  }
  return c;
}

Eigen::VectorXd eval_curve(const SmoothCurve& c, const Eigen::VectorXd& grid) {
  return eval_basis(c.basis, grid) * c.coef;
}

}  // namespace cfgm

#include "cfgm/fpca.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace cfgm {

Eigen::MatrixXd CurveMatrix::node_values(int j) const {
  Eigen::MatrixXd out(n, grid.size());
  for (int i = 0; i < n; ++i) out.row(i) = values.row(i * p + j);
  return out;
}

Eigen::VectorXd trapezoid_weights(const Eigen::VectorXd& grid) {
  const int G = static_cast<int>(grid.size());
  if (G < 2) throw std::invalid_argument("fpca: grid needs >= 2 points");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(G);
  for (int g = 0; g + 1 < G; ++g) {
    const double h = grid[g + 1] - grid[g];
    if (h <= 0.0)
      throw std::invalid_argument("fpca: grid must be strictly increasing");
    w[g] += h / 2.0;
    w[g + 1] += h / 2.0;
  }
  return w;
}

Eigen::VectorXd unit_grid(int G) {
  Eigen::VectorXd grid(G);
  for (int g = 0; g < G; ++g) grid[g] = static_cast<double>(g + 1) / G;
  return grid;
}

Eigen::MatrixXd estimate_covariance(const Eigen::MatrixXd& curve_values) {
  const int n = static_cast<int>(curve_values.rows());
  if (n < 2)
    throw std::invalid_argument("fpca: covariance needs at least 2 curves");
  const Eigen::RowVectorXd mean = curve_values.colwise().mean();
  const Eigen::MatrixXd centered = curve_values.rowwise() - mean;
  return centered.transpose() * centered / (n - 1.0);
}

Eigen::MatrixXd estimate_covariance(const std::vector<SmoothCurve>& curves,
                                    const Eigen::VectorXd& grid) {
  const int n = static_cast<int>(curves.size());
  if (n < 2)
    throw std::invalid_argument("fpca: covariance needs at least 2 curves");
  Eigen::MatrixXd values(n, grid.size());
  for (int i = 0; i < n; ++i) values.row(i) = eval_curve(curves[i], grid);
  return estimate_covariance(values);
}

NodeBasis fpca_basis(const Eigen::MatrixXd& cov, const Eigen::VectorXd& grid,
                     const Eigen::VectorXd& weights, int m_max) {
  const int G = static_cast<int>(cov.rows());
  if (cov.cols() != G || grid.size() != G || weights.size() != G)
    throw std::invalid_argument("fpca: covariance/grid/weights size mismatch");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-8)
    throw std::invalid_argument("fpca: covariance is not symmetric");
  if (m_max < 1) throw std::invalid_argument("fpca: m_max must be >= 1");

  const Eigen::VectorXd ws = weights.cwiseSqrt();
  const Eigen::MatrixXd sym =
      ws.asDiagonal() * ((cov + cov.transpose()) / 2.0) * ws.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("fpca: eigendecomposition failed");

  const int M = std::min(m_max, G);
  NodeBasis basis;
  basis.grid = grid;
  basis.weights = weights;
  basis.eigenvalues.resize(M);
  basis.eigenfunctions.resize(G, M);
  for (int m = 0; m < M; ++m) {
    const int src = G - 1 - m;  // Eigen sorts ascending
    basis.eigenvalues[m] = std::max(eig.eigenvalues()[src], 0.0);
    Eigen::VectorXd phi = eig.eigenvectors().col(src).cwiseQuotient(ws);
    for (int g = 0; g < G; ++g) {
      const double wphi = weights[g] * phi[g];
      if (std::abs(wphi) > 1e-12) {
        if (wphi < 0.0) phi = -phi;
        break;
      }
    }
    basis.eigenfunctions.col(m) = phi;
  }
  return basis;
}

int select_truncation(const Eigen::VectorXd& eigenvalues, double pve) {
  if (!(pve > 0.0 && pve <= 1.0))
    throw std::invalid_argument("fpca: pve threshold must be in (0, 1]");
  const int M = static_cast<int>(eigenvalues.size());
  double total = 0.0;
  for (int m = 0; m < M; ++m) {
    if (eigenvalues[m] < 0.0)
      throw std::invalid_argument("fpca: eigenvalues must be nonnegative");
    if (m > 0 && eigenvalues[m] > eigenvalues[m - 1] + 1e-12)
      throw std::invalid_argument("fpca: eigenvalues must be non-increasing");
    total += eigenvalues[m];
  }
  if (total <= 0.0)
    throw std::runtime_error("fpca: all-zero spectrum (degenerate node)");
  double cum = 0.0;
  for (int m = 0; m < M; ++m) {
    cum += eigenvalues[m];
    if (cum / total >= pve) return m + 1;
  }
  return M;
}

ScoreTensor project_scores(const CurveMatrix& curves, const NodeBasis& basis,
                           int M) {
  const int G = static_cast<int>(curves.grid.size());
  if (basis.grid.size() != G ||
      (basis.grid - curves.grid).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("fpca: basis and curves use different grids");
  if (M < 1 || M > basis.m())
    throw std::invalid_argument("fpca: truncation outside basis range");

  // W-weighted eigenfunctions; scores are one GEMM per node after centering.
  const Eigen::MatrixXd proj =
      basis.weights.asDiagonal() * basis.eigenfunctions.leftCols(M);

  ScoreTensor st;
  st.node = basis.node;
  st.n = curves.n;
  st.p = curves.p;
  st.m = M;
  st.scores.resize(curves.n, curves.p * M);
  for (int k = 0; k < curves.p; ++k) {
    Eigen::MatrixXd vals = curves.node_values(k);
    const Eigen::RowVectorXd mean = vals.colwise().mean();
    vals.rowwise() -= mean;
    st.scores.block(0, k * M, curves.n, M).noalias() = vals * proj;
  }
  return st;
}

}  // namespace cfgm

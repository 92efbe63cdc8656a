#pragma once

#include <Eigen/Core>

#include "cfgm/basis.hpp"

namespace cfgm {

/// Node-specific orthonormal basis from functional PCA.
///
/// Eigenfunctions are stored as values on a common quadrature grid and are
/// orthonormal under the stored weights. Sign convention: the first nonzero
/// quadrature-weighted component of each eigenfunction is positive.
struct NodeBasis {
  int node = -1;
  Eigen::VectorXd grid;             // G quadrature points
  Eigen::VectorXd weights;          // G quadrature weights
  Eigen::MatrixXd eigenfunctions;   // G x M
  Eigen::VectorXd eigenvalues;      // M, non-increasing, >= 0
  Eigen::VectorXd mean;             // G, mean function of the target node

  int m() const { return static_cast<int>(eigenvalues.size()); }
};

/// Projection scores of every (sample, node) curve onto one node's basis.
struct ScoreTensor {
  int node = -1;  // basis node j
  int n = 0, p = 0, m = 0;
  Eigen::MatrixXd scores;  // n x (p*m); node k occupies columns [k*m, (k+1)*m)

  Eigen::Block<const Eigen::MatrixXd> node_block(int k) const {
    return scores.block(0, k * m, n, m);
  }
};

/// Curve values of the whole dataset on a shared evaluation grid.
struct CurveMatrix {
  int n = 0, p = 0;
  Eigen::VectorXd grid;
  Eigen::MatrixXd values;  // (n*p) x G, row i*p + j

  Eigen::MatrixXd node_values(int j) const;
};

/// Trapezoid quadrature weights for a strictly increasing grid.
Eigen::VectorXd trapezoid_weights(const Eigen::VectorXd& grid);

/// Equally spaced evaluation grid on (0, 1]: (1/G, 2/G, ..., 1).
Eigen::VectorXd unit_grid(int G);

/// Sample covariance (divisor n-1) of curve values on the grid after
/// subtracting the cross-sample mean function. Requires n >= 2.
Eigen::MatrixXd estimate_covariance(const Eigen::MatrixXd& curve_values);

/// Covariance from a list of smoothed curves evaluated on `grid`.
Eigen::MatrixXd estimate_covariance(const std::vector<SmoothCurve>& curves,
                                    const Eigen::VectorXd& grid);

/// Eigenpairs of the weighted covariance operator: solves the symmetrized
/// problem W^(1/2) C W^(1/2) and maps eigenvectors back so the returned
/// eigenfunctions are exactly orthonormal under the quadrature. Keeps at most
/// m_max pairs. The caller fills `node` and `mean`.
NodeBasis fpca_basis(const Eigen::MatrixXd& cov, const Eigen::VectorXd& grid,
                     const Eigen::VectorXd& weights, int m_max);

/// Smallest M whose cumulative proportion of explained variance reaches
/// `pve` (in (0,1]); errors on an all-zero spectrum.
int select_truncation(const Eigen::VectorXd& eigenvalues, double pve);

/// Scores a_{i,k,m} = <curve_{i,k} - mean_k, phi_m> under the basis
/// quadrature; centering uses each node k's own mean function.
ScoreTensor project_scores(const CurveMatrix& curves, const NodeBasis& basis,
                           int M);

}  // namespace cfgm

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <utility>
#include <vector>

#include "cfgm/fpca.hpp"
#include "cfgm/funcdata.hpp"

namespace cfgm {

/// Stacked regression design Z for one target node.
///
/// Columns come in (p-1)(q+1) groups of M, ordered covariate-major: the
/// blocks for c = 0 over regressor nodes k != j in node order, then c = 1,
/// and so on. Column block (c, k) row i equals x_{i,c} * a_{i,k}'.
struct DesignMatrix {
  Eigen::MatrixXd Z;  // n x (M * (p-1) * (q+1))
  int target = -1;
  int m = 0, p = 0, q = 0;
  std::vector<int> regressors;  // node ids k != target, ascending

  int groups() const { return (p - 1) * (q + 1); }
  int group_of(int c, int reg_index) const { return c * (p - 1) + reg_index; }
  int covariate_of_group(int g) const { return g / (p - 1); }
  int regressor_of_group(int g) const { return regressors[g % (p - 1)]; }
};

/// Estimated M x M blocks B^c_k for one target node, laid out like the
/// design groups.
struct CoefficientBlocks {
  int target = -1;
  int m = 0, p = 0, q = 0;
  std::vector<int> regressors;
  std::vector<Eigen::MatrixXd> blocks;  // (p-1)(q+1) matrices, each M x M

  int groups() const { return static_cast<int>(blocks.size()); }
  const Eigen::MatrixXd& block(int c, int reg_index) const {
    return blocks[c * (p - 1) + reg_index];
  }
  double block_norm(int g) const { return blocks[g].norm(); }

  static CoefficientBlocks zeros(const DesignMatrix& design);
};

struct AdmmReport {
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;
  bool converged = false;
};

struct AdmmOptions {
  double rho = 1.0;
  double tol_abs = 1e-5;
  double tol_rel = 1e-4;
  int max_iter = 1000;
};

/// Build the design and the n x M response of target-node scores from a
/// score tensor computed with the target node's basis.
std::pair<DesignMatrix, Eigen::MatrixXd> build_design(
    const ScoreTensor& scores, const CovariateDesign& X, int target);

/// Smallest penalty that forces the all-zero solution:
/// max_g ||Z_g' A||_F / n for the objective (1/2n)||A - Z B||_F^2 + lambda
/// sum ||B_g||_F. Errors on a zero response.
double lambda_max(const DesignMatrix& design, const Eigen::MatrixXd& response);

/// max(0, 1 - kappa/||V||_F) * V; exactly zero when ||V||_F <= kappa.
Eigen::MatrixXd block_soft_threshold(const Eigen::MatrixXd& v, double kappa);

/// Group-lasso path solver with a cached factorization of Z'Z/n + rho*I.
/// Successive fit() calls warm-start from the previous solution, which is
/// the intended use along a descending lambda grid.
class GroupLassoPath {
 public:
  GroupLassoPath(const DesignMatrix& design, const Eigen::MatrixXd& response,
                 const AdmmOptions& options = {});

  std::pair<CoefficientBlocks, AdmmReport> fit(double lambda);
  void reset_warm_start();
  double lambda_max() const { return lambda_max_; }

 private:
  const DesignMatrix& design_;
  Eigen::MatrixXd response_;
  AdmmOptions opts_;
  Eigen::LLT<Eigen::MatrixXd> llt_;  // Z'Z/n + rho I
  Eigen::MatrixXd ztr_;              // Z'A/n
  Eigen::MatrixXd P_, U_;            // stacked (d x M) splitting variables
  double lambda_max_ = 0.0;
};

/// One-shot ADMM solve of the group-lasso objective. Returns exact zeros in
/// thresholded blocks; a non-converged run is returned with converged=false.
std::pair<CoefficientBlocks, AdmmReport> admm_group_lasso(
    const DesignMatrix& design, const Eigen::MatrixXd& response, double lambda,
    const AdmmOptions& options = {});

/// Unpenalized least squares restricted to the active groups; inactive
/// blocks are exactly zero. A rank-deficient active design falls back to a
/// small ridge (1e-8) on the normal equations.
struct RestrictedFit {
  CoefficientBlocks coef;
  bool ridge_fallback = false;
};
RestrictedFit restricted_least_squares(const DesignMatrix& design,
                                       const Eigen::MatrixXd& response,
                                       const std::vector<int>& active_groups);

/// Objective value (1/2n)||A - Z B||_F^2 + lambda * sum_g ||B_g||_F.
double group_lasso_objective(const DesignMatrix& design,
                             const Eigen::MatrixXd& response,
                             const CoefficientBlocks& coef, double lambda);

namespace detail {

/// Restricted least squares from precomputed Gram = Z'Z and rhs = Z'A,
/// returning the stacked (d_active x M) solution for the active columns.
/// Used by selective cross-validation where per-fold Grams are cached.
Eigen::MatrixXd restricted_ls_from_gram(const Eigen::MatrixXd& gram,
                                        const Eigen::MatrixXd& rhs,
                                        bool* ridge_fallback);

/// Stack blocks into the (d x M) form used by the ADMM iteration
/// (block g rows hold B_g transposed) and back.
Eigen::MatrixXd stack(const CoefficientBlocks& coef);
CoefficientBlocks unstack(const Eigen::MatrixXd& stacked,
                          const DesignMatrix& design);

}  // namespace detail

}  // namespace cfgm

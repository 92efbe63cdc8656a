#include "cfgm/solver.hpp"

#include <cmath>
#include <stdexcept>

namespace cfgm {

CoefficientBlocks CoefficientBlocks::zeros(const DesignMatrix& design) {
  CoefficientBlocks coef;
  coef.target = design.target;
  coef.m = design.m;
  coef.p = design.p;
  coef.q = design.q;
  coef.regressors = design.regressors;
  coef.blocks.assign(design.groups(), Eigen::MatrixXd::Zero(design.m, design.m));
  return coef;
}

std::pair<DesignMatrix, Eigen::MatrixXd> build_design(
    const ScoreTensor& scores, const CovariateDesign& X, int target) {
  if (scores.node != target)
    throw std::invalid_argument(
        "solver: score tensor was built with basis of node " +
        std::to_string(scores.node) + ", target is " + std::to_string(target));
  if (X.n() != scores.n)
    throw std::invalid_argument("solver: covariate rows do not match samples");
  if (target < 0 || target >= scores.p)
    throw std::invalid_argument("solver: target node out of range");

  const int n = scores.n, p = scores.p, m = scores.m;
  const int q = X.q();

  DesignMatrix design;
  design.target = target;
  design.m = m;
  design.p = p;
  design.q = q;
  for (int k = 0; k < p; ++k)
    if (k != target) design.regressors.push_back(k);

  design.Z.resize(n, m * (p - 1) * (q + 1));
  for (int c = 0; c <= q; ++c)
    for (int r = 0; r < p - 1; ++r) {
      const int k = design.regressors[r];
      design.Z.block(0, (c * (p - 1) + r) * m, n, m) =
          X.X.col(c).asDiagonal() * scores.node_block(k);
    }
  return {std::move(design), scores.node_block(target)};
}

double lambda_max(const DesignMatrix& design, const Eigen::MatrixXd& response) {
  if (response.norm() == 0.0)
    throw std::runtime_error("solver: zero response, lambda_max undefined");
  const int n = static_cast<int>(design.Z.rows());
  const int m = design.m;
  double best = 0.0;
  for (int g = 0; g < design.groups(); ++g) {
    const double norm =
        (design.Z.middleCols(g * m, m).transpose() * response).norm() / n;
    best = std::max(best, norm);
  }
  return best;
}

Eigen::MatrixXd block_soft_threshold(const Eigen::MatrixXd& v, double kappa) {
  if (kappa < 0.0) throw std::invalid_argument("solver: kappa must be >= 0");
  if (kappa == 0.0) return v;
  const double norm = v.norm();
  if (norm <= kappa) return Eigen::MatrixXd::Zero(v.rows(), v.cols());
  return (1.0 - kappa / norm) * v;
}

namespace detail {

Eigen::MatrixXd stack(const CoefficientBlocks& coef) {
  const int m = coef.m;
  Eigen::MatrixXd out(m * coef.groups(), m);
  for (int g = 0; g < coef.groups(); ++g)
    out.middleRows(g * m, m) = coef.blocks[g].transpose();
  return out;
}

CoefficientBlocks unstack(const Eigen::MatrixXd& stacked,
                          const DesignMatrix& design) {
  CoefficientBlocks coef = CoefficientBlocks::zeros(design);
  for (int g = 0; g < design.groups(); ++g)
    coef.blocks[g] = stacked.middleRows(g * design.m, design.m).transpose();
  return coef;
}

Eigen::MatrixXd restricted_ls_from_gram(const Eigen::MatrixXd& gram,
                                        const Eigen::MatrixXd& rhs,
                                        bool* ridge_fallback) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive();
  if (ok && gram.rows() > 0) {
    const Eigen::VectorXd d = ldlt.vectorD();
    const double dmax = d.maxCoeff();
    if (!(dmax > 0.0) || d.minCoeff() <= 1e-10 * dmax) ok = false;
  }
  if (ok) {
    if (ridge_fallback) *ridge_fallback = false;
    return ldlt.solve(rhs);
  }
  if (ridge_fallback) *ridge_fallback = true;
  Eigen::MatrixXd ridged = gram;
  ridged.diagonal().array() += 1e-8;
  return Eigen::LDLT<Eigen::MatrixXd>(ridged).solve(rhs);
}

}  // namespace detail

double group_lasso_objective(const DesignMatrix& design,
                             const Eigen::MatrixXd& response,
                             const CoefficientBlocks& coef, double lambda) {
  const Eigen::MatrixXd stacked = detail::stack(coef);
  const double n = static_cast<double>(design.Z.rows());
  double penalty = 0.0;
  for (int g = 0; g < coef.groups(); ++g) penalty += coef.blocks[g].norm();
  return (response - design.Z * stacked).squaredNorm() / (2.0 * n) +
         lambda * penalty;
}

GroupLassoPath::GroupLassoPath(const DesignMatrix& design,
                               const Eigen::MatrixXd& response,
                               const AdmmOptions& options)
    : design_(design), response_(response), opts_(options) {
  if (opts_.rho <= 0.0) throw std::invalid_argument("solver: rho must be > 0");
  const int n = static_cast<int>(design.Z.rows());
  const int d = static_cast<int>(design.Z.cols());
  if (response.rows() != n || response.cols() != design.m)
    throw std::invalid_argument("solver: response shape mismatch");

  Eigen::MatrixXd lhs = design.Z.transpose() * design.Z / double(n);
  lhs.diagonal().array() += opts_.rho;
  llt_.compute(lhs);
  if (llt_.info() != Eigen::Success)
    throw std::runtime_error("solver: factorization of Z'Z/n + rho I failed");
  ztr_ = design.Z.transpose() * response / double(n);
  P_ = Eigen::MatrixXd::Zero(d, design.m);
  U_ = Eigen::MatrixXd::Zero(d, design.m);
  lambda_max_ = cfgm::lambda_max(design, response);
}

void GroupLassoPath::reset_warm_start() {
  P_.setZero();
  U_.setZero();
}

std::pair<CoefficientBlocks, AdmmReport> GroupLassoPath::fit(double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("solver: lambda must be >= 0");
  const int m = design_.m;
  const int G = design_.groups();
  const double rho = opts_.rho;
  const double size_factor = std::sqrt(double(P_.size()));

  AdmmReport report;
  Eigen::MatrixXd Q, Pprev, V;
  for (int it = 1; it <= opts_.max_iter; ++it) {
    Q = llt_.solve(ztr_ + rho * (P_ - U_));
    Pprev = P_;
    V = Q + U_;
    for (int g = 0; g < G; ++g) {
      auto vg = V.middleRows(g * m, m);
      const double norm = vg.norm();
      if (norm <= lambda / rho)
        P_.middleRows(g * m, m).setZero();
      else
        P_.middleRows(g * m, m) = (1.0 - lambda / (rho * norm)) * vg;
    }
    U_ += Q - P_;

    report.iterations = it;
    report.primal_residual = (Q - P_).norm();
    report.dual_residual = rho * (P_ - Pprev).norm();
    const double eps_pri =
        size_factor * opts_.tol_abs +
        opts_.tol_rel * std::max(Q.norm(), P_.norm());
    const double eps_dual =
        size_factor * opts_.tol_abs + opts_.tol_rel * rho * U_.norm();
    if (!P_.allFinite() || !U_.allFinite())
      throw std::runtime_error("solver: ADMM iterates became non-finite");
    if (report.primal_residual <= eps_pri &&
        report.dual_residual <= eps_dual) {
      report.converged = true;
      break;
    }
  }

  CoefficientBlocks coef = detail::unstack(P_, design_);
  report.objective = group_lasso_objective(design_, response_, coef, lambda);
  return {std::move(coef), report};
}

std::pair<CoefficientBlocks, AdmmReport> admm_group_lasso(
    const DesignMatrix& design, const Eigen::MatrixXd& response, double lambda,
    const AdmmOptions& options) {
  GroupLassoPath path(design, response, options);
  return path.fit(lambda);
}

RestrictedFit restricted_least_squares(const DesignMatrix& design,
                                       const Eigen::MatrixXd& response,
                                       const std::vector<int>& active_groups) {
  RestrictedFit fit;
  fit.coef = CoefficientBlocks::zeros(design);
  if (active_groups.empty()) return fit;

  const int m = design.m;
  const int d = static_cast<int>(active_groups.size()) * m;
  Eigen::MatrixXd Zact(design.Z.rows(), d);
  for (size_t a = 0; a < active_groups.size(); ++a) {
    const int g = active_groups[a];
    if (g < 0 || g >= design.groups())
      throw std::invalid_argument("solver: active group out of range");
    Zact.middleCols(a * m, m) = design.Z.middleCols(g * m, m);
  }
  const Eigen::MatrixXd solution = detail::restricted_ls_from_gram(
      Zact.transpose() * Zact, Zact.transpose() * response,
      &fit.ridge_fallback);
  for (size_t a = 0; a < active_groups.size(); ++a)
    fit.coef.blocks[active_groups[a]] =
        solution.middleRows(a * m, m).transpose();
  return fit;
}

}  // namespace cfgm

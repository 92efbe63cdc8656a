#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>

#include "cfgm/funcdata.hpp"
#include "cfgm/graphs.hpp"

namespace cfgm {

/// Scenario-specific precision matrices Theta^0 and Theta^1; both Theta^0
/// and Theta^0 + Theta^1 are symmetric positive definite (after the
/// documented diagonal repair when the raw assembly is not).
struct PrecisionPair {
  int p = 0;
  int m_star = 15;
  Eigen::MatrixXd theta0;  // pM* x pM*
  Eigen::MatrixXd theta1;
  std::string scenario;
  double shift0 = 0.0;      // diagonal repair applied to Theta^0
  double shift_sum = 0.0;   // diagonal repair applied to Theta^0 + Theta^1
};

/// True edge supports read off the off-diagonal blocks.
struct TrueGraphs {
  EdgeSet g0;      // support of Theta^0
  EdgeSet g1;      // support of Theta^1 (the differential graph)
  EdgeSet group1;  // support of Theta^0 + Theta^1
};

/// Block-banded template: Toeplitz diagonal blocks T_vw = 0.5^|v-w|,
/// 0.4*A on the first band (A tridiagonal with unit diagonal and 0.5 off),
/// 0.2*I on the second band, zero beyond. Returned as assembled; positive
/// definiteness is enforced by apply_scenario.
Eigen::MatrixXd block_precision_template(int p, int m_star = 15);

/// Apply one of the six scenario edits (S1..S6) to the template, returning
/// the pair (Theta^0, Theta^1). Off-diagonal blocks only are edited; a
/// matrix whose smallest eigenvalue falls below 1e-8 is repaired by adding
/// (|min eig| + 0.01) I, recorded in the shift fields.
PrecisionPair apply_scenario(const Eigen::MatrixXd& theta,
                             const std::string& scenario, int p);

/// Draw the synthetic dataset: per sample, Gaussian scores with covariance
/// (Theta^0 + x_i Theta^1)^{-1} sampled by solving against the precision
/// Cholesky factor, evaluated against the first M* unit-norm Fourier
/// functions on tau equally spaced points in (0,1], plus iid observation
/// noise of variance sigma2. The first n_per_group samples form the
/// reference group (x = 0). One RNG stream per sample, so generation is
/// order-independent and bit-reproducible for a given seed.
std::pair<FunctionalDataset, CovariateDesign> sample_dataset(
    const PrecisionPair& pair, int n_per_group, int tau = 100,
    double sigma2 = 0.5, std::uint64_t seed = 0);

/// Edge (j,k) is in a graph iff the corresponding off-diagonal block has
/// Frobenius norm > 1e-12.
TrueGraphs true_graphs(const PrecisionPair& pair);

nlohmann::json truth_to_json(const PrecisionPair& pair, const TrueGraphs& tg);

}  // namespace cfgm

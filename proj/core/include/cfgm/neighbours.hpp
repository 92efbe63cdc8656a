#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "cfgm/solver.hpp"

namespace cfgm {

/// Hyperparameter search configuration for one neighbourhood regression.
struct TuningConfig {
  int lambda_grid_size = 50;
  double lambda_min_ratio = 1e-3;  // grid spans [ratio*lmax, lmax], log-spaced

  /// Explicit threshold candidates; when empty, candidates are taken per
  /// lambda as quantiles of the nonzero block norms of the full-data fit
  /// (levels below) plus a 1e-6 absolute floor.
  std::vector<double> epsilon_candidates;
  std::vector<double> epsilon_quantiles = {0.10, 0.25, 0.50, 0.75, 0.90};

  int folds = 5;
  double search_fraction = 1.0;  // randomized search over candidate pairs
  std::uint64_t seed = 0;
  AdmmOptions admm;
};

/// One evaluated candidate of the selective cross-validation search.
struct ScvRow {
  double lambda = 0.0;
  double epsilon = 0.0;
  int active_blocks = 0;
  double score = 0.0;  // K-fold average of SCV-RSS
};

struct ScvResult {
  double lambda = 0.0;
  double epsilon = 0.0;
  std::vector<ScvRow> table;
  bool degenerate = false;  // every candidate was the empty model
};

/// Per-covariate neighbour sets of one target node.
struct NeighbourSets {
  std::vector<std::vector<int>> per_covariate;  // c -> sorted node ids
};

/// Everything estimated for one target node.
struct NodeResult {
  int node = -1;
  int truncation = 0;  // M used
  double lambda = 0.0;
  double epsilon = 0.0;
  CoefficientBlocks coef;  // fit at (lambda, epsilon)
  NeighbourSets neighbours;
  /// effects[c][k] = Eff^c_{k,node} for k in neighbours of covariate c >= 1;
  /// +infinity marks an emergent edge (zero baseline block).
  std::vector<std::map<int, double>> effects;
  std::vector<ScvRow> scv_table;
  bool degenerate = false;
};

/// Deterministic stratified K folds: indices are permuted per stratum (the
/// joint pattern of all dummy covariate columns) with a seeded shuffle, then
/// dealt in contiguous chunks. Returns test-index sets, each sorted.
std::vector<std::vector<int>> make_folds(const CovariateDesign& X, int K,
                                         std::uint64_t seed);

/// Selective cross-validation over (lambda, epsilon): full-data path fits,
/// block screening at each epsilon, per-fold unpenalized refits on the
/// screened set, and the SCV-RSS score with a BIC-type complexity term.
ScvResult scv_select(const DesignMatrix& design, const Eigen::MatrixXd& response,
                     const CovariateDesign& X, const TuningConfig& cfg);

/// Neighbour sets {k : ||B^c_k||_F > epsilon} for every covariate.
NeighbourSets threshold_neighbours(const CoefficientBlocks& coef,
                                   double epsilon);

/// Relative effect ||B0 + Bc||_F / ||B0||_F; +infinity when the baseline
/// block is zero (emergent edge).
double relative_effect(const Eigen::MatrixXd& b0, const Eigen::MatrixXd& bc);

/// Full per-node pipeline: design, SCV selection, final fit, thresholding,
/// relative effects. Deterministic given cfg.seed (internal streams are
/// derived from the seed and the node id).
NodeResult fit_node(const ScoreTensor& scores, const CovariateDesign& X,
                    int node, const TuningConfig& cfg);

}  // namespace cfgm

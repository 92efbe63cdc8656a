#pragma once

#include <cstdint>
#include <string>

#include "cfgm/basis.hpp"
#include "cfgm/fpca.hpp"
#include "cfgm/funcdata.hpp"
#include "cfgm/graphs.hpp"
#include "cfgm/metrics.hpp"
#include "cfgm/neighbours.hpp"

namespace cfgm {

struct SmoothingConfig {
  BasisKind kind = BasisKind::Fourier;
  int size = 15;           // R
  double roughness = 0.0;  // lambda_s
};

struct FpcaConfig {
  double pve = 0.95;  // proportion of explained variance for truncation
  int fixed_m = 0;    // > 0 overrides the PVE rule
  int grid_size = 100;
};

/// Full configuration of a fit run.
struct RunConfig {
  SmoothingConfig smoothing;
  FpcaConfig fpca;
  TuningConfig tuning;
  SymmetrizeMode mode = SymmetrizeMode::Or;
  int threads = 1;
  std::uint64_t seed = 0;
};

struct FitResult {
  int p = 0;
  int q = 0;
  int truncation = 0;  // shared M
  std::vector<NodeResult> nodes;
  ConditionalGraphs graphs;
  /// Group-specific graphs for binary covariates, keyed by covariate index.
  std::vector<std::pair<int, EdgeSet>> group_graphs;
  double seconds_smoothing = 0.0;
  double seconds_fpca = 0.0;
  double seconds_fit = 0.0;
};

/// Whole estimation pipeline: validate, smooth, node-wise FPCA with a shared
/// truncation level (maximum of the per-node PVE choices), parallel node
/// fits, and graph aggregation. Output is independent of the thread count.
FitResult fit_all(const FunctionalDataset& ds, const CovariateDesign& X,
                  const RunConfig& cfg);

/// Smooth every (sample, node) series and evaluate on the common grid.
CurveMatrix smooth_dataset(const FunctionalDataset& ds,
                           const SmoothingConfig& cfg, int grid_size,
                           int threads = 1);

nlohmann::json node_results_to_json(const FitResult& fit);
nlohmann::json fit_manifest(const RunConfig& cfg, const FitResult& fit,
                            int n, const std::string& functions_path,
                            const std::string& covariates_path);

/// Canonical key=value rendering of a RunConfig (the config-file format).
std::string config_to_text(const RunConfig& cfg);
/// Parse the key=value config format; unknown keys are errors.
void apply_config_text(const std::string& text, RunConfig& cfg);

/// FNV-1a hash of a byte string, used for config/input fingerprints.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace cfgm

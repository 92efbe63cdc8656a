#include "cfgm/neighbours.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "cfgm/rng.hpp"

namespace cfgm {

namespace {

// Type-7 (linear interpolation) quantile of a sorted vector.
double quantile_sorted(const std::vector<double>& sorted, double level) {
  const size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = level * (n - 1);
  const size_t lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, n - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<double> lambda_grid(double lmax, int size, double min_ratio) {
  std::vector<double> grid(size);
  if (size == 1) {
    grid[0] = lmax;
    return grid;
  }
  const double log_hi = std::log(lmax);
  const double log_lo = std::log(min_ratio * lmax);
  for (int i = 0; i < size; ++i)
    grid[i] = std::exp(log_hi + (log_lo - log_hi) * i / (size - 1.0));
  return grid;
}

void seeded_shuffle(std::vector<int>& v, SplitMix64& rng) {
  for (size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

std::vector<std::vector<int>> make_folds(const CovariateDesign& X, int K,
                                         std::uint64_t seed) {
  const int n = X.n();
  if (K < 2) throw std::invalid_argument("neighbours: need at least 2 folds");
  if (n < 2 * K)
    throw std::invalid_argument("neighbours: need n >= 2K samples for " +
                                std::to_string(K) + " folds");

  // Strata: joint pattern of the dummy covariate columns (single stratum
  // when there are none).
  std::vector<int> dummy_cols;
  for (int c = 0; c < static_cast<int>(X.columns.size()); ++c)
    if (X.columns[c].kind == CovariateColumn::Kind::Dummy) dummy_cols.push_back(c);
  std::map<std::vector<int>, std::vector<int>> strata;
  for (int i = 0; i < n; ++i) {
    std::vector<int> key;
    for (int c : dummy_cols) key.push_back(X.X(i, c) != 0.0 ? 1 : 0);
    strata[key].push_back(i);
  }

  std::vector<std::vector<int>> folds(K);
  SplitMix64 rng(SplitMix64::stream(seed, 0x666f6c64));  // "fold"
  for (auto& [key, idx] : strata) {
    seeded_shuffle(idx, rng);
    // Contiguous chunks whose sizes differ by at most one.
    const size_t sz = idx.size();
    const size_t base = sz / K, extra = sz % K;
    size_t pos = 0;
    for (int nu = 0; nu < K; ++nu) {
      const size_t len = base + (static_cast<size_t>(nu) < extra ? 1 : 0);
      for (size_t l = 0; l < len; ++l) folds[nu].push_back(idx[pos++]);
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

NeighbourSets threshold_neighbours(const CoefficientBlocks& coef,
                                   double epsilon) {
  if (epsilon < 0.0)
    throw std::invalid_argument("neighbours: threshold must be >= 0");
  NeighbourSets sets;
  sets.per_covariate.resize(coef.q + 1);
  for (int c = 0; c <= coef.q; ++c)
    for (int r = 0; r < coef.p - 1; ++r)
      if (coef.block(c, r).norm() > epsilon)
        sets.per_covariate[c].push_back(coef.regressors[r]);
  return sets;
}

double relative_effect(const Eigen::MatrixXd& b0, const Eigen::MatrixXd& bc) {
  const double base = b0.norm();
  if (base == 0.0) return std::numeric_limits<double>::infinity();
  return (b0 + bc).norm() / base;
}

ScvResult scv_select(const DesignMatrix& design, const Eigen::MatrixXd& response,
                     const CovariateDesign& X, const TuningConfig& cfg) {
  if (cfg.lambda_grid_size < 1)
    throw std::invalid_argument("neighbours: lambda grid size must be >= 1");
  if (!(cfg.search_fraction > 0.0 && cfg.search_fraction <= 1.0))
    throw std::invalid_argument("neighbours: search fraction must be in (0,1]");

  const int m = design.m;
  const int G = design.groups();
  const int K = cfg.folds;

  const auto folds = make_folds(X, K, cfg.seed);

  // Per-fold training Gram and right-hand side: full Gram minus the test
  // part, so candidate refits only extract submatrices.
  const Eigen::MatrixXd gram_full = design.Z.transpose() * design.Z;
  const Eigen::MatrixXd rhs_full = design.Z.transpose() * response;
  struct Fold {
    std::vector<int> test;
    Eigen::MatrixXd gram, rhs;   // training normal equations
    Eigen::MatrixXd ztest, rtest;
  };
  std::vector<Fold> fold_data(K);
  for (int nu = 0; nu < K; ++nu) {
    Fold& f = fold_data[nu];
    f.test = folds[nu];
    const int nt = static_cast<int>(f.test.size());
    f.ztest.resize(nt, design.Z.cols());
    f.rtest.resize(nt, m);
    for (int r = 0; r < nt; ++r) {
      f.ztest.row(r) = design.Z.row(f.test[r]);
      f.rtest.row(r) = response.row(f.test[r]);
    }
    f.gram = gram_full - f.ztest.transpose() * f.ztest;
    f.rhs = rhs_full - f.ztest.transpose() * f.rtest;
  }

  // Full-data path fits, warm-started top-down, with the threshold
  // candidates attached per lambda.
  GroupLassoPath path(design, response, cfg.admm);
  const auto lambdas =
      lambda_grid(path.lambda_max(), cfg.lambda_grid_size, cfg.lambda_min_ratio);
  struct Candidate {
    double lambda, epsilon;
    std::vector<int> active;
  };
  std::vector<Candidate> candidates;
  for (double lambda : lambdas) {
    auto [coef, report] = path.fit(lambda);
    std::vector<double> norms(G);
    for (int g = 0; g < G; ++g) norms[g] = coef.block_norm(g);

    std::vector<double> eps_set;
    if (!cfg.epsilon_candidates.empty()) {
      eps_set = cfg.epsilon_candidates;
    } else {
      std::vector<double> nonzero;
      for (double v : norms)
        if (v > 0.0) nonzero.push_back(v);
      std::sort(nonzero.begin(), nonzero.end());
      eps_set.push_back(1e-6);
      if (!nonzero.empty())
        for (double level : cfg.epsilon_quantiles)
          eps_set.push_back(quantile_sorted(nonzero, level));
    }
    std::sort(eps_set.begin(), eps_set.end());
    eps_set.erase(std::unique(eps_set.begin(), eps_set.end()), eps_set.end());

    for (double eps : eps_set) {
      Candidate cand{lambda, eps, {}};
      for (int g = 0; g < G; ++g)
        if (norms[g] > eps) cand.active.push_back(g);
      candidates.push_back(std::move(cand));
    }
  }

  // Optional randomized search: a seeded sample without replacement.
  if (cfg.search_fraction < 1.0) {
    const size_t keep = std::max<size_t>(
        1, static_cast<size_t>(
               std::ceil(cfg.search_fraction * candidates.size())));
    std::vector<int> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 rng(SplitMix64::stream(cfg.seed, 0x73656172));  // "sear"
    seeded_shuffle(order, rng);
    order.resize(keep);
    std::sort(order.begin(), order.end());  // keep deterministic eval order
    std::vector<Candidate> sampled;
    for (int idx : order) sampled.push_back(std::move(candidates[idx]));
    candidates = std::move(sampled);
  }

  ScvResult result;
  double best_score = std::numeric_limits<double>::infinity();
  int best_active = -1;
  double best_lambda = -1.0;
  bool any_nonempty = false;
  for (const auto& cand : candidates) {
    const int na = static_cast<int>(cand.active.size());
    any_nonempty = any_nonempty || na > 0;
    std::vector<int> cols;
    cols.reserve(static_cast<size_t>(na) * m);
    for (int g : cand.active)
      for (int c = 0; c < m; ++c) cols.push_back(g * m + c);

    double total = 0.0;
    for (const auto& f : fold_data) {
      Eigen::MatrixXd resid;
      if (na == 0) {
        resid = f.rtest;
      } else {
        Eigen::MatrixXd gram(cols.size(), cols.size());
        Eigen::MatrixXd rhs(cols.size(), m);
        for (size_t a = 0; a < cols.size(); ++a) {
          rhs.row(a) = f.rhs.row(cols[a]);
          for (size_t b = 0; b < cols.size(); ++b)
            gram(a, b) = f.gram(cols[a], cols[b]);
        }
        const Eigen::MatrixXd sol =
            detail::restricted_ls_from_gram(gram, rhs, nullptr);
        Eigen::MatrixXd ztest_act(f.ztest.rows(), cols.size());
        for (size_t a = 0; a < cols.size(); ++a)
          ztest_act.col(a) = f.ztest.col(cols[a]);
        resid = f.rtest - ztest_act * sol;
      }
      total += resid.squaredNorm() +
               std::log(static_cast<double>(f.test.size())) * na;
    }
    const double score = total / K;
    result.table.push_back({cand.lambda, cand.epsilon, na, score});

    // Ties prefer the sparser model, then the larger penalty.
    const bool better =
        score < best_score ||
        (score == best_score &&
         (na < best_active || (na == best_active && cand.lambda > best_lambda)));
    if (better) {
      best_score = score;
      best_active = na;
      best_lambda = cand.lambda;
      result.lambda = cand.lambda;
      result.epsilon = cand.epsilon;
    }
  }

  if (!any_nonempty) {
    // Every candidate is the empty model: fall back to the largest lambda.
    result.degenerate = true;
    result.lambda = lambdas.front();
    result.epsilon = candidates.empty() ? 1e-6 : candidates.front().epsilon;
  }
  return result;
}

NodeResult fit_node(const ScoreTensor& scores, const CovariateDesign& X,
                    int node, const TuningConfig& cfg) {
  NodeResult result;
  result.node = node;
  result.truncation = scores.m;
  try {
    auto [design, response] = build_design(scores, X, node);

    TuningConfig node_cfg = cfg;
    node_cfg.seed = SplitMix64::stream(cfg.seed, static_cast<std::uint64_t>(node));
    ScvResult scv = scv_select(design, response, X, node_cfg);
    result.lambda = scv.lambda;
    result.epsilon = scv.epsilon;
    result.scv_table = std::move(scv.table);
    result.degenerate = scv.degenerate;

    auto [coef, report] = admm_group_lasso(design, response, result.lambda,
                                           node_cfg.admm);
    result.coef = std::move(coef);
    result.neighbours = threshold_neighbours(result.coef, result.epsilon);

    result.effects.resize(design.q + 1);
    for (int c = 1; c <= design.q; ++c) {
      for (int k : result.neighbours.per_covariate[c]) {
        const int r = static_cast<int>(
            std::lower_bound(design.regressors.begin(), design.regressors.end(),
                             k) -
            design.regressors.begin());
        result.effects[c][k] =
            relative_effect(result.coef.block(0, r), result.coef.block(c, r));
      }
    }
  } catch (const std::exception& e) {
    throw std::runtime_error("node " + std::to_string(node) + ": " + e.what());
  }
  return result;
}

}  // namespace cfgm

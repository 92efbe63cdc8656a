// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exits nonzero if any criterion fails.

#include <atomic>
#include <cstdio>
#include <iostream>
#include <thread>
#include <vector>

#include "cfgm/pipeline.hpp"
#include "cfgm/simgen.hpp"
#include "support/oracles.hpp"

using namespace cfgm;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

struct ReplicateScore {
  double f1_g0_or = 0.0, f1_g1_or = 0.0, f1_g1_and = 0.0;
};

ReplicateScore run_replicate(const std::string& scenario, int p,
                             int n_per_group, std::uint64_t seed) {
  const auto pair =
      apply_scenario(block_precision_template(p, 15), scenario, p);
  const auto truth = true_graphs(pair);
  auto [ds, X] = sample_dataset(pair, n_per_group, 100, 0.5, seed);

  RunConfig cfg;
  cfg.seed = seed;
  cfg.threads = 1;  // replicates run in parallel instead
  const FitResult fit = fit_all(ds, X, cfg);

  ReplicateScore score;
  score.f1_g0_or =
      scores(confusion(fit.graphs.edge_sets[0], truth.g0, p)).f1;
  score.f1_g1_or =
      scores(confusion(fit.graphs.edge_sets[1], truth.g1, p)).f1;
  const EdgeSet g1_and = symmetrize(fit.nodes, SymmetrizeMode::And, 1);
  score.f1_g1_and = scores(confusion(g1_and, truth.g1, p)).f1;
  return score;
}

// Replicate-level parallelism; each fit runs single-threaded.
std::vector<ReplicateScore> run_batch(const std::string& scenario, int p,
                                      int n_per_group, int replicates) {
  std::vector<ReplicateScore> out(replicates);
  std::atomic<int> next{0};
  const int workers = std::min<int>(
      replicates, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int r = next.fetch_add(1); r < replicates;
           r = next.fetch_add(1))
        out[r] = run_replicate(scenario, p, n_per_group, r + 1);
    });
  for (auto& th : pool) th.join();
  return out;
}

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

// ---------------------------------------------------------------- criteria

void criteria_1_and_3() {
  const auto batch = run_batch("S3", 10, 150, 10);
  std::vector<double> g0, g1_or, g1_and;
  for (const auto& s : batch) {
    g0.push_back(s.f1_g0_or);
    g1_or.push_back(s.f1_g1_or);
    g1_and.push_back(s.f1_g1_and);
  }
  const double m0 = mean_of(g0), m1 = mean_of(g1_or), ma = mean_of(g1_and);
  report(1, m1 >= 0.70 && m0 >= 0.85,
         "S3 p=10 n/2=150 x10: mean F1(G1)=" + fmt(m1) +
             " (need >= 0.70), mean F1(G0)=" + fmt(m0) + " (need >= 0.85)");
  report(3, m1 >= ma,
         "OR vs AND on the same runs: F1(G1) OR=" + fmt(m1) +
             " >= AND=" + fmt(ma));
}

void criterion_2() {
  bool pass = true;
  std::string detail = "p=10 n/2=200 x10, mean F1(G1):";
  for (const char* scenario : {"S1", "S3", "S4", "S5"}) {
    const auto batch = run_batch(scenario, 10, 200, 10);
    std::vector<double> g1;
    for (const auto& s : batch) g1.push_back(s.f1_g1_or);
    const double m = mean_of(g1);
    pass = pass && m >= 0.85;
    detail += std::string(" ") + scenario + "=" + fmt(m);
  }
  report(2, pass, detail + " (each needs >= 0.85)");
}

struct OracleInstance {
  DesignMatrix design;
  Eigen::MatrixXd response;
};

OracleInstance make_oracle_instance(std::uint64_t seed) {
  const int n = 60, p = 4, m = 3;
  ScoreTensor st;
  st.node = p - 1;
  st.n = n;
  st.p = p;
  st.m = m;
  st.scores = oracles::random_normal(n, p * m, seed);
  CovariateDesign X;
  X.X.resize(n, 2);
  X.X.col(0).setOnes();
  for (int i = 0; i < n; ++i) X.X(i, 1) = i % 2;
  X.columns.push_back({CovariateColumn::Kind::Intercept, "", "", ""});
  X.columns.push_back({CovariateColumn::Kind::Dummy, "g", "b", "a"});
  auto [design, response] = build_design(st, X, p - 1);
  // plant two active blocks plus noise
  cfgm::SplitMix64 rng(seed ^ 0xACCE);
  Eigen::MatrixXd y = 0.4 * oracles::random_normal(n, m, seed ^ 0xE)
                      + response * 0.0;
  const Eigen::MatrixXd b0 = oracles::random_normal(m, m, seed ^ 0xB0);
  const Eigen::MatrixXd b1 = oracles::random_normal(m, m, seed ^ 0xB1);
  for (int i = 0; i < n; ++i) {
    y.row(i) += (b0 * st.scores.row(i).segment(0, m).transpose()).transpose();
    y.row(i) += X.X(i, 1) *
                (b1 * st.scores.row(i).segment(m, m).transpose()).transpose();
  }
  return {std::move(design), std::move(y)};
}

void criteria_4_and_5() {
  AdmmOptions tight;
  tight.tol_abs = 1e-9;
  tight.tol_rel = 1e-9;
  tight.max_iter = 100000;

  bool obj_ok = true, kkt_ok = true, lmax_ok = true;
  double worst_rel = 0.0, worst_kkt = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = make_oracle_instance(seed);
    const double lmax = lambda_max(inst.design, inst.response);
    const double lambda = 0.3 * lmax;

    auto [coef, rep] =
        admm_group_lasso(inst.design, inst.response, lambda, tight);
    const Eigen::MatrixXd oracle = oracles::prox_gradient_group_lasso(
        inst.design.Z, inst.response, lambda, inst.design.m);
    const double obj_oracle = oracles::group_lasso_objective_stacked(
        inst.design.Z, inst.response, oracle, lambda, inst.design.m);
    const double rel =
        std::abs(rep.objective - obj_oracle) / std::max(1e-12, obj_oracle);
    worst_rel = std::max(worst_rel, rel);
    obj_ok = obj_ok && rel <= 1e-6;

    // KKT residuals at the stated tolerance
    const int n = static_cast<int>(inst.design.Z.rows());
    const int m = inst.design.m;
    const Eigen::MatrixXd resid =
        inst.response - inst.design.Z * detail::stack(coef);
    for (int g = 0; g < inst.design.groups(); ++g) {
      const Eigen::MatrixXd grad =
          inst.design.Z.middleCols(g * m, m).transpose() * resid / double(n);
      const double norm = coef.blocks[g].norm();
      const double viol =
          norm == 0.0
              ? std::max(0.0, grad.norm() - lambda)
              : (grad - lambda * coef.blocks[g].transpose() / norm).norm();
      worst_kkt = std::max(worst_kkt, viol);
      kkt_ok = kkt_ok && viol <= 1e-4;
    }

    // lambda_max exactness
    auto [at, r1] = admm_group_lasso(inst.design, inst.response, lmax, tight);
    double norm_at = 0.0;
    for (const auto& b : at.blocks) norm_at += b.norm();
    auto [below, r2] =
        admm_group_lasso(inst.design, inst.response, 0.99 * lmax, tight);
    double norm_below = 0.0;
    for (const auto& b : below.blocks) norm_below += b.norm();
    lmax_ok = lmax_ok && norm_at == 0.0 && norm_below > 0.0;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "20 oracle instances: worst relative objective gap %.2e "
                "(<= 1e-6), worst KKT residual %.2e (<= 1e-4)",
                worst_rel, worst_kkt);
  report(4, obj_ok && kkt_ok, buf);
  report(5, lmax_ok,
         "fit at lambda_max is identically zero, at 0.99*lambda_max nonzero, "
         "on all 20 instances");
}

void criterion_6() {
  const int p = 4, ms = 3, dim = p * ms, draws = 20000;
  const auto pair = apply_scenario(block_precision_template(p, ms), "S3", p);
  const Eigen::MatrixXd sigma = pair.theta0.inverse();
  auto [ds, X] = sample_dataset(pair, draws, 8, 0.0, 2024);

  const auto basis = BasisSystem::fourier(ms);
  Eigen::MatrixXd alphas(draws, dim);
  for (int i = 0; i < draws; ++i)
    for (int j = 0; j < p; ++j) {
      const auto& s = ds.at(i, j);
      alphas.row(i).segment(j * ms, ms) =
          smooth_curve(s.times, s.values, basis, 0.0).coef.transpose();
    }
  const Eigen::MatrixXd centered = alphas.rowwise() - alphas.colwise().mean();
  const Eigen::MatrixXd emp = centered.transpose() * centered / (draws - 1.0);
  int violations = 0;
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) {
      const double se = std::sqrt(
          (sigma(a, a) * sigma(b, b) + sigma(a, b) * sigma(a, b)) / draws);
      if (std::abs(emp(a, b) - sigma(a, b)) > 3.0 * se) ++violations;
    }
  report(6, violations == 0,
         "generator fidelity: " + std::to_string(violations) +
             " of 144 covariance entries outside 3 standard errors");
}

void criterion_7() {
  std::string detail;
  bool pass = true;
  auto require = [&](bool ok, const std::string& what) {
    pass = pass && ok;
    if (!ok) detail += " [" + what + "]";
  };

  // A realistic mid-size instance shared by the property checks.
  const auto pair = apply_scenario(block_precision_template(6, 5), "S1", 6);
  auto [ds, X] = sample_dataset(pair, 60, 60, 0.5, 11);
  RunConfig cfg;
  cfg.smoothing.size = 5;
  cfg.fpca.grid_size = 60;
  cfg.tuning.lambda_grid_size = 20;
  cfg.seed = 11;

  // FPCA orthonormality and PVE monotonicity
  const auto curves = smooth_dataset(ds, cfg.smoothing, cfg.fpca.grid_size);
  const auto weights = trapezoid_weights(curves.grid);
  const Eigen::MatrixXd values = curves.node_values(0);
  NodeBasis basis = fpca_basis(estimate_covariance(values), curves.grid,
                               weights, cfg.fpca.grid_size);
  basis.node = 0;
  basis.mean = values.colwise().mean();
  const Eigen::MatrixXd gram = basis.eigenfunctions.transpose() *
                               weights.asDiagonal() * basis.eigenfunctions;
  require((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols()))
                  .cwiseAbs()
                  .maxCoeff() <= 1e-6,
          "fpca orthonormality");
  {
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    const Eigen::RowVectorXd mean = values.colwise().mean();
    for (int M = 1; M <= 10; ++M) {
      const auto st = project_scores(curves, basis, M);
      double err = 0.0;
      for (int i = 0; i < curves.n; ++i)
        err += ((basis.eigenfunctions.leftCols(M) *
                 st.scores.row(i).head(M).transpose())
                    .transpose() -
                (values.row(i) - mean))
                   .squaredNorm();
      monotone = monotone && err <= prev + 1e-9;
      prev = err;
    }
    require(monotone, "pve monotonicity");
  }

  // Full fit for the graph-level properties.
  const FitResult fit = fit_all(ds, X, cfg);

  // threshold monotonicity on the fitted blocks
  {
    bool monotone = true;
    const auto& coef = fit.nodes[2].coef;
    const auto loose = threshold_neighbours(coef, 0.0);
    const auto tight = threshold_neighbours(coef, 0.2);
    for (size_t c = 0; c < tight.per_covariate.size(); ++c)
      for (int k : tight.per_covariate[c])
        monotone = monotone &&
                   std::count(loose.per_covariate[c].begin(),
                              loose.per_covariate[c].end(), k) == 1;
    require(monotone, "threshold monotonicity");
  }

  // OR contains AND for every covariate
  for (int c = 0; c <= fit.q; ++c) {
    const auto any = symmetrize(fit.nodes, SymmetrizeMode::Or, c);
    const auto both = symmetrize(fit.nodes, SymmetrizeMode::And, c);
    bool subset = true;
    for (const Edge& e : both.edges) subset = subset && any.contains(e.u, e.v);
    require(subset, "AND subset of OR");
  }

  // adjacency symmetry with zero diagonal
  for (int c = 0; c <= fit.q; ++c) {
    const auto adj = to_adjacency(fit.graphs.edge_sets[c], fit.p);
    require(adj == adj.transpose().eval() &&
                adj.diagonal().cwiseAbs().maxCoeff() == 0.0,
            "adjacency symmetry");
  }

  // metrics enumeration cases
  {
    const auto est = EdgeSet::from_pairs({{0, 1}, {0, 2}});
    const auto truth = EdgeSet::from_pairs({{0, 1}, {1, 2}});
    const auto c = confusion(est, truth, 3);
    require(c.tp == 1 && c.fp == 1 && c.fn == 1 && c.tn == 0,
            "metrics enumeration");
    const auto s = scores({0, 0, 0, 3});
    require(s.f1 == 1.0 && s.precision == 1.0, "metrics 0/0 convention");
  }

  // determinism under thread-count variation
  {
    RunConfig threaded = cfg;
    threaded.threads = 8;
    const FitResult fit8 = fit_all(ds, X, threaded);
    bool same = fit.truncation == fit8.truncation;
    for (int c = 0; c <= fit.q && same; ++c)
      same = fit.graphs.edge_sets[c].edges == fit8.graphs.edge_sets[c].edges;
    same = same && node_results_to_json(fit).dump() ==
                       node_results_to_json(fit8).dump();
    require(same, "thread-count determinism");
  }

  report(7, pass,
         pass ? "all module property suites hold"
              : "property failures:" + detail);
}

}  // namespace

int main() {
  criteria_4_and_5();
  criterion_6();
  criterion_7();
  criteria_1_and_3();
  criterion_2();
  std::printf("%s\n", failures == 0 ? "ACCEPTANCE: ALL CRITERIA PASS"
                                    : "ACCEPTANCE: FAILURES PRESENT");
  return failures == 0 ? 0 : 1;
}

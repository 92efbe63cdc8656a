#include "cfgm/simgen.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "cfgm/basis.hpp"
#include "cfgm/fpca.hpp"
#include "cfgm/rng.hpp"

namespace cfgm {

namespace {

double min_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m,
                                                     Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

// Adds (|min eig| + 0.01) I when the matrix is not numerically PD; returns
// the applied shift (0 when none was needed).
double repair_pd(Eigen::MatrixXd& m) {
  const double emin = min_eigenvalue(m);
  if (emin > 1e-8) return 0.0;
  const double shift = std::abs(emin) + 0.01;
  m.diagonal().array() += shift;
  return shift;
}

std::string zero_pad(int value, int width) {
  std::string s = std::to_string(value);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

}  // namespace

Eigen::MatrixXd block_precision_template(int p, int m_star) {
  if (p < 3) throw std::invalid_argument("simgen: template needs p >= 3");
  if (m_star < 1) throw std::invalid_argument("simgen: m_star must be >= 1");

  Eigen::MatrixXd T(m_star, m_star);
  for (int v = 0; v < m_star; ++v)
    for (int w = 0; w < m_star; ++w) T(v, w) = std::pow(0.5, std::abs(v - w));
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m_star, m_star);
  for (int v = 0; v + 1 < m_star; ++v) A(v, v + 1) = A(v + 1, v) = 0.5;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m_star, m_star);

  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(p * m_star, p * m_star);
  for (int j = 0; j < p; ++j)
    for (int k = 0; k < p; ++k) {
      const int d = std::abs(k - j);
      if (d > 2) continue;
      const Eigen::MatrixXd& blk = d == 0 ? T : (d == 1 ? A : I);
      const double scale = d == 0 ? 1.0 : (d == 1 ? 0.4 : 0.2);
      theta.block(k * m_star, j * m_star, m_star, m_star) = scale * blk;
    }
  return theta;
}

PrecisionPair apply_scenario(const Eigen::MatrixXd& theta,
                             const std::string& scenario, int p) {
  const int dim = static_cast<int>(theta.rows());
  if (theta.cols() != dim || dim % p != 0)
    throw std::invalid_argument("simgen: template shape inconsistent with p");
  const int ms = dim / p;

  Eigen::MatrixXd theta0 = theta;
  Eigen::MatrixXd theta_sum = theta;  // Theta^0 + Theta^1

  auto zero_window = [&](Eigen::MatrixXd& m, int lo, int hi) {
    // off-diagonal blocks only; diagonal blocks keep the marginal precision
    for (int j = lo; j <= hi; ++j)
      for (int k = lo; k <= hi; ++k)
        if (j != k) m.block(k * ms, j * ms, ms, ms).setZero();
  };
  auto scale_window = [&](Eigen::MatrixXd& m, int lo, int hi, double f) {
    for (int j = lo; j <= hi; ++j)
      for (int k = lo; k <= hi; ++k)
        if (j != k)
          m.block(k * ms, j * ms, ms, ms) =
              f * theta.block(k * ms, j * ms, ms, ms);
  };

  // Paper windows in 1-based node indices, translated to 0-based:
  // first third {1..floor(p/3)}, last third {p-floor(p/3)+1..p},
  // S4 halves {1..floor(p/2)+1} and {p-floor(p/2)..p}.
  const int third = p / 3;
  const int half = p / 2;
  if (scenario == "S1") {
    zero_window(theta0, 0, third - 1);
  } else if (scenario == "S2") {
    zero_window(theta_sum, 0, third - 1);
  } else if (scenario == "S3") {
    zero_window(theta0, 0, third - 1);
    zero_window(theta_sum, p - third, p - 1);
  } else if (scenario == "S4") {
    zero_window(theta0, 0, half);
    zero_window(theta_sum, p - half - 1, p - 1);
  } else if (scenario == "S5") {
    scale_window(theta0, 0, third - 1, 0.25);
  } else if (scenario == "S6") {
    scale_window(theta_sum, 0, third - 1, 0.25);
  } else {
    throw std::invalid_argument("simgen: unknown scenario '" + scenario +
                                "' (expected S1..S6)");
  }

  PrecisionPair pair;
  pair.p = p;
  pair.m_star = ms;
  pair.scenario = scenario;
  pair.shift0 = repair_pd(theta0);
  pair.shift_sum = repair_pd(theta_sum);
  pair.theta0 = theta0;
  pair.theta1 = theta_sum - theta0;
  return pair;
}

std::pair<FunctionalDataset, CovariateDesign> sample_dataset(
    const PrecisionPair& pair, int n_per_group, int tau, double sigma2,
    std::uint64_t seed) {
  if (n_per_group < 1)
    throw std::invalid_argument("simgen: need at least one sample per group");
  if (tau < 2) throw std::invalid_argument("simgen: tau must be >= 2");
  if (sigma2 < 0.0) throw std::invalid_argument("simgen: sigma2 must be >= 0");

  const int p = pair.p, ms = pair.m_star;
  const int dim = p * ms;
  const int n = 2 * n_per_group;

  Eigen::LLT<Eigen::MatrixXd> llt0(pair.theta0);
  Eigen::LLT<Eigen::MatrixXd> llt1(pair.theta0 + pair.theta1);
  if (llt0.info() != Eigen::Success || llt1.info() != Eigen::Success)
    throw std::runtime_error("simgen: precision factorization failed");

  const Eigen::VectorXd grid = unit_grid(tau);
  const Eigen::MatrixXd F = eval_basis(BasisSystem::fourier(ms), grid);
  const double noise_sd = std::sqrt(sigma2);

  FunctionalDataset ds;
  ds.n = n;
  ds.p = p;
  const int sample_width = static_cast<int>(std::to_string(n).size());
  const int node_width = static_cast<int>(std::to_string(p).size());
  for (int i = 0; i < n; ++i)
    ds.sample_ids.push_back("s" + zero_pad(i + 1, sample_width));
  for (int j = 0; j < p; ++j)
    ds.node_ids.push_back("n" + zero_pad(j + 1, node_width));
  ds.series.resize(static_cast<size_t>(n) * p);

  std::vector<double> times(grid.data(), grid.data() + tau);
  for (int i = 0; i < n; ++i) {
    const bool group1 = i >= n_per_group;
    // Stream per sample: first p*M* draws are the score vector, then p*tau
    // noise draws, node-major.
    SplitMix64 rng(SplitMix64::stream(seed, static_cast<std::uint64_t>(i)));
    Eigen::VectorXd z(dim);
    for (int d = 0; d < dim; ++d) z[d] = rng.normal();
    const auto& llt = group1 ? llt1 : llt0;
    // cov(alpha) = Theta^{-1} with alpha = L^{-T} z
    const Eigen::VectorXd alpha =
        llt.matrixU().solve(z);
    for (int j = 0; j < p; ++j) {
      TimeSeries& s = ds.at(i, j);
      s.times = times;
      s.values.resize(tau);
      const Eigen::VectorXd signal = F * alpha.segment(j * ms, ms);
      for (int k = 0; k < tau; ++k)
        s.values[k] = signal[k] + noise_sd * rng.normal();
    }
  }

  CovariateDesign X;
  X.X.resize(n, 2);
  X.X.col(0).setOnes();
  for (int i = 0; i < n; ++i) X.X(i, 1) = i >= n_per_group ? 1.0 : 0.0;
  X.columns.push_back({CovariateColumn::Kind::Intercept, "", "", ""});
  X.columns.push_back({CovariateColumn::Kind::Dummy, "group", "g1", "g0"});
  return {std::move(ds), std::move(X)};
}

TrueGraphs true_graphs(const PrecisionPair& pair) {
  const int p = pair.p, ms = pair.m_star;
  auto support = [&](const Eigen::MatrixXd& m) {
    EdgeSet set;
    for (int j = 0; j < p; ++j)
      for (int k = j + 1; k < p; ++k)
        if (m.block(k * ms, j * ms, ms, ms).norm() > 1e-12)
          set.edges.push_back({j, k});
    return set;
  };
  TrueGraphs tg;
  tg.g0 = support(pair.theta0);
  tg.g1 = support(pair.theta1);
  tg.group1 = support(pair.theta0 + pair.theta1);
  return tg;
}

nlohmann::json truth_to_json(const PrecisionPair& pair, const TrueGraphs& tg) {
  auto edges_json = [](const EdgeSet& set) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Edge& e : set.edges) arr.push_back({e.u, e.v});
    return arr;
  };
  nlohmann::json j;
  j["p"] = pair.p;
  j["m_star"] = pair.m_star;
  j["scenario"] = pair.scenario;
  j["pd_shift_theta0"] = pair.shift0;
  j["pd_shift_theta_sum"] = pair.shift_sum;
  j["g0"] = edges_json(tg.g0);
  j["g1"] = edges_json(tg.g1);
  j["group1"] = edges_json(tg.group1);
  return j;
}

}  // namespace cfgm

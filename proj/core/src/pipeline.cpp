#include "cfgm/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace cfgm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Run job(0..count-1) on `threads` workers; exceptions are rethrown in the
// caller. Work is claimed from an atomic counter, results must be written to
// per-index slots so the outcome does not depend on scheduling.
template <typename Job>
void parallel_for(int count, int threads, Job&& job) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1))
          job(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace

CurveMatrix smooth_dataset(const FunctionalDataset& ds,
                           const SmoothingConfig& cfg, int grid_size,
                           int threads) {
  const BasisSystem basis = cfg.kind == BasisKind::Fourier
                                ? BasisSystem::fourier(cfg.size)
                                : BasisSystem::bspline(cfg.size);
  CurveMatrix curves;
  curves.n = ds.n;
  curves.p = ds.p;
  curves.grid = unit_grid(grid_size);
  curves.values.resize(static_cast<Eigen::Index>(ds.n) * ds.p, grid_size);
  const Eigen::MatrixXd eval = eval_basis(basis, curves.grid);

  parallel_for(ds.n * ds.p, threads, [&](int idx) {
    const TimeSeries& s = ds.series[idx];
    const SmoothCurve c = smooth_curve(s.times, s.values, basis, cfg.roughness);
    curves.values.row(idx) = (eval * c.coef).transpose();
  });
  return curves;
}

FitResult fit_all(const FunctionalDataset& ds, const CovariateDesign& X,
                  const RunConfig& cfg) {
  const ValidationReport report = validate(ds);
  if (report.has_errors()) {
    std::string msg = "pipeline: dataset failed validation:";
    for (size_t i = 0; i < report.issues.size() && i < 5; ++i)
      msg += "\n  " + report.issues[i].location + ": " +
             report.issues[i].message;
    throw std::runtime_error(msg);
  }
  if (X.n() != ds.n)
    throw std::invalid_argument("pipeline: covariate rows do not match samples");

  FitResult fit;
  fit.p = ds.p;
  fit.q = X.q();

  auto t0 = Clock::now();
  const CurveMatrix curves =
      smooth_dataset(ds, cfg.smoothing, cfg.fpca.grid_size, cfg.threads);
  fit.seconds_smoothing = seconds_since(t0);

  // Node bases first: the shared truncation is the maximum of the per-node
  // PVE selections, so every block has the same shape.
  t0 = Clock::now();
  const Eigen::VectorXd weights = trapezoid_weights(curves.grid);
  std::vector<NodeBasis> bases(ds.p);
  parallel_for(ds.p, cfg.threads, [&](int j) {
    const Eigen::MatrixXd values = curves.node_values(j);
    NodeBasis basis = fpca_basis(estimate_covariance(values), curves.grid,
                                 weights, cfg.fpca.grid_size);
    basis.node = j;
    basis.mean = values.colwise().mean();
    bases[j] = std::move(basis);
  });
  int truncation = cfg.fpca.fixed_m;
  if (truncation <= 0) {
    truncation = 1;
    for (int j = 0; j < ds.p; ++j)
      truncation =
          std::max(truncation, select_truncation(bases[j].eigenvalues,
                                                 cfg.fpca.pve));
  }
  fit.truncation = truncation;
  fit.seconds_fpca = seconds_since(t0);

  t0 = Clock::now();
  fit.nodes.resize(ds.p);
  TuningConfig tuning = cfg.tuning;
  tuning.seed = cfg.seed;
  parallel_for(ds.p, cfg.threads, [&](int j) {
    const ScoreTensor scores = project_scores(curves, bases[j], truncation);
    fit.nodes[j] = fit_node(scores, X, j, tuning);
  });
  fit.seconds_fit = seconds_since(t0);

  fit.graphs = build_graphs(fit.nodes, ds.p, cfg.mode);
  for (int c = 1; c <= fit.q; ++c)
    if (X.columns[c].kind == CovariateColumn::Kind::Dummy)
      fit.group_graphs.emplace_back(c,
                                    group_graph(fit.nodes, X, c, cfg.mode));
  return fit;
}

nlohmann::json node_results_to_json(const FitResult& fit) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const NodeResult& r : fit.nodes) {
    nlohmann::json jn;
    jn["node"] = r.node;
    jn["lambda"] = r.lambda;
    jn["epsilon"] = r.epsilon;
    jn["truncation"] = r.truncation;
    jn["degenerate"] = r.degenerate;
    jn["neighbours"] = nlohmann::json::array();
    for (size_t c = 0; c < r.neighbours.per_covariate.size(); ++c)
      jn["neighbours"].push_back(r.neighbours.per_covariate[c]);
    nlohmann::json effects = nlohmann::json::array();
    for (size_t c = 0; c < r.effects.size(); ++c) {
      nlohmann::json ec = nlohmann::json::object();
      for (const auto& [k, eff] : r.effects[c]) {
        if (std::isinf(eff))
          ec[std::to_string(k)] = "inf";
        else
          ec[std::to_string(k)] = eff;
      }
      effects.push_back(ec);
    }
    jn["effects"] = effects;
    nlohmann::json table = nlohmann::json::array();
    for (const ScvRow& row : r.scv_table)
      table.push_back({{"lambda", row.lambda},
                       {"epsilon", row.epsilon},
                       {"active_blocks", row.active_blocks},
                       {"score", row.score}});
    jn["scv_table"] = table;
    nodes.push_back(jn);
  }
  nlohmann::json j;
  j["p"] = fit.p;
  j["q"] = fit.q;
  j["truncation"] = fit.truncation;
  j["nodes"] = nodes;
  return j;
}

std::string config_to_text(const RunConfig& cfg) {
  std::ostringstream out;
  out << "smoothing.basis = "
      << (cfg.smoothing.kind == BasisKind::Fourier ? "fourier" : "bspline")
      << '\n';
  out << "smoothing.size = " << cfg.smoothing.size << '\n';
  out << "smoothing.roughness = " << format_double(cfg.smoothing.roughness)
      << '\n';
  out << "fpca.pve = " << format_double(cfg.fpca.pve) << '\n';
  out << "fpca.fixed_m = " << cfg.fpca.fixed_m << '\n';
  out << "fpca.grid_size = " << cfg.fpca.grid_size << '\n';
  out << "tuning.lambda_grid_size = " << cfg.tuning.lambda_grid_size << '\n';
  out << "tuning.lambda_min_ratio = "
      << format_double(cfg.tuning.lambda_min_ratio) << '\n';
  out << "tuning.folds = " << cfg.tuning.folds << '\n';
  out << "tuning.search_fraction = "
      << format_double(cfg.tuning.search_fraction) << '\n';
  {
    out << "tuning.epsilon_candidates =";
    for (double e : cfg.tuning.epsilon_candidates)
      out << ' ' << format_double(e);
    out << '\n';
    out << "tuning.epsilon_quantiles =";
    for (double e : cfg.tuning.epsilon_quantiles) out << ' ' << format_double(e);
    out << '\n';
  }
  out << "admm.rho = " << format_double(cfg.tuning.admm.rho) << '\n';
  out << "admm.tol_abs = " << format_double(cfg.tuning.admm.tol_abs) << '\n';
  out << "admm.tol_rel = " << format_double(cfg.tuning.admm.tol_rel) << '\n';
  out << "admm.max_iter = " << cfg.tuning.admm.max_iter << '\n';
  out << "mode = " << to_string(cfg.mode) << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "threads = " << cfg.threads << '\n';
  return out.str();
}

void apply_config_text(const std::string& text, RunConfig& cfg) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key = value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto to_list = [&] {
      std::vector<double> out;
      std::istringstream vs(value);
      double x;
      while (vs >> x) out.push_back(x);
      return out;
    };
    try {
      if (key == "smoothing.basis")
        cfg.smoothing.kind =
            value == "fourier" ? BasisKind::Fourier : BasisKind::BSpline;
      else if (key == "smoothing.size") cfg.smoothing.size = std::stoi(value);
      else if (key == "smoothing.roughness")
        cfg.smoothing.roughness = std::stod(value);
      else if (key == "fpca.pve") cfg.fpca.pve = std::stod(value);
      else if (key == "fpca.fixed_m") cfg.fpca.fixed_m = std::stoi(value);
      else if (key == "fpca.grid_size") cfg.fpca.grid_size = std::stoi(value);
      else if (key == "tuning.lambda_grid_size")
        cfg.tuning.lambda_grid_size = std::stoi(value);
      else if (key == "tuning.lambda_min_ratio")
        cfg.tuning.lambda_min_ratio = std::stod(value);
      else if (key == "tuning.folds") cfg.tuning.folds = std::stoi(value);
      else if (key == "tuning.search_fraction")
        cfg.tuning.search_fraction = std::stod(value);
      else if (key == "tuning.epsilon_candidates")
        cfg.tuning.epsilon_candidates = to_list();
      else if (key == "tuning.epsilon_quantiles")
        cfg.tuning.epsilon_quantiles = to_list();
      else if (key == "admm.rho") cfg.tuning.admm.rho = std::stod(value);
      else if (key == "admm.tol_abs") cfg.tuning.admm.tol_abs = std::stod(value);
      else if (key == "admm.tol_rel") cfg.tuning.admm.tol_rel = std::stod(value);
      else if (key == "admm.max_iter")
        cfg.tuning.admm.max_iter = std::stoi(value);
      else if (key == "mode") cfg.mode = symmetrize_mode_from_string(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "threads") cfg.threads = std::stoi(value);
      else
        throw std::runtime_error("unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": bad value for '" + key + "'");
    }
  }
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

namespace {

std::uint64_t file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return 0;
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a(ss.str());
}

}  // namespace

nlohmann::json fit_manifest(const RunConfig& cfg, const FitResult& fit, int n,
                            const std::string& functions_path,
                            const std::string& covariates_path) {
  nlohmann::json j;
  const std::string config_text = config_to_text(cfg);
  j["config"] = config_text;
  j["config_hash"] = fnv1a(config_text);
  j["n"] = n;
  j["p"] = fit.p;
  j["q"] = fit.q;
  j["truncation"] = fit.truncation;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["inputs"] = nlohmann::json::object();
  if (!functions_path.empty())
    j["inputs"]["functions"] = {{"path", functions_path},
                                {"hash", file_hash(functions_path)}};
  if (!covariates_path.empty())
    j["inputs"]["covariates"] = {{"path", covariates_path},
                                 {"hash", file_hash(covariates_path)}};
  j["timings"] = {{"smoothing", fit.seconds_smoothing},
                  {"fpca", fit.seconds_fpca},
                  {"fit", fit.seconds_fit}};
  return j;
}

}  // namespace cfgm

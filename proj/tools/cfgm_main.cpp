// Command-line front end: simulate / fit / evaluate / bench.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "cfgm/pipeline.hpp"
#include "cfgm/simgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  json j;
  in >> j;
  return j;
}

void write_covariates_csv(const cfgm::FunctionalDataset& ds, int n_per_group,
                          const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "sample_id,group\n";
  for (int i = 0; i < ds.n; ++i)
    out << ds.sample_ids[i] << ',' << (i < n_per_group ? "g0" : "g1") << '\n';
}

int cmd_simulate(const std::string& scenario, int p, int n_per_group, int m_star,
                 int tau, double sigma2, std::uint64_t seed,
                 const std::string& out_dir) {
  const Eigen::MatrixXd theta = cfgm::block_precision_template(p, m_star);
  const cfgm::PrecisionPair pair = cfgm::apply_scenario(theta, scenario, p);
  if (pair.shift0 > 0.0 || pair.shift_sum > 0.0)
    std::cerr << "note: PD repair shifts applied (theta0 " << pair.shift0
              << ", theta0+theta1 " << pair.shift_sum << ")\n";
  auto [ds, X] = cfgm::sample_dataset(pair, n_per_group, tau, sigma2, seed);

  fs::create_directories(out_dir);
  cfgm::write_functional_csv(ds, (fs::path(out_dir) / "functions.csv").string());
  write_covariates_csv(ds, n_per_group, fs::path(out_dir) / "covariates.csv");
  write_json(fs::path(out_dir) / "truth.json",
             cfgm::truth_to_json(pair, cfgm::true_graphs(pair)));
  std::cout << "wrote functions.csv, covariates.csv, truth.json to " << out_dir
            << "\n";
  return 0;
}

void write_fit_outputs(const cfgm::FitResult& fit,
                       const std::vector<std::string>& node_ids,
                       const fs::path& out_dir) {
  for (int c = 0; c <= fit.q; ++c) {
    const std::string stem = "graph_c" + std::to_string(c);
    json jg;
    Eigen::MatrixXd adj;
    if (c == 0) {
      // The population graph is emitted unweighted.
      jg = cfgm::graph_to_json(fit.graphs.edge_sets[c], fit.p, fit.graphs.mode,
                               c);
      adj = cfgm::to_adjacency(fit.graphs.edge_sets[c], fit.p);
    } else {
      jg = cfgm::graph_to_json(fit.graphs.weights[c], fit.p, fit.graphs.mode, c);
      adj = cfgm::to_adjacency(fit.graphs.weights[c], fit.p);
    }
    write_json(out_dir / (stem + ".json"), jg);
    cfgm::write_adjacency_csv(adj, node_ids,
                              (out_dir / (stem + ".csv")).string());
  }
  for (const auto& [c, edges] : fit.group_graphs) {
    const std::string stem = "group_graph_c" + std::to_string(c);
    write_json(out_dir / (stem + ".json"),
               cfgm::graph_to_json(edges, fit.p, fit.graphs.mode, c));
    cfgm::write_adjacency_csv(cfgm::to_adjacency(edges, fit.p), node_ids,
                              (out_dir / (stem + ".csv")).string());
  }
  write_json(out_dir / "nodes.json", cfgm::node_results_to_json(fit));
}

int cmd_fit(const std::string& functions_path, const std::string& covariates_path,
            const cfgm::RunConfig& cfg, const std::string& out_dir) {
  const cfgm::FunctionalDataset ds = cfgm::load_functional_csv(functions_path);
  const cfgm::ValidationReport report = cfgm::validate(ds);
  if (report.has_errors()) {
    std::cerr << "input validation failed:\n";
    for (const auto& issue : report.issues)
      std::cerr << "  " << issue.location << ": " << issue.message << "\n";
    return 2;
  }
  cfgm::CovariateDesign X;
  if (covariates_path.empty()) {
    X = cfgm::CovariateDesign::intercept_only(ds.n);
  } else {
    const auto raw = cfgm::reorder_rows(cfgm::load_covariate_csv(covariates_path),
                                        ds.sample_ids);
    X = cfgm::encode_covariates(raw);
  }

  const cfgm::FitResult fit = cfgm::fit_all(ds, X, cfg);

  fs::create_directories(out_dir);
  write_fit_outputs(fit, ds.node_ids, out_dir);
  write_json(fs::path(out_dir) / "manifest.json",
             cfgm::fit_manifest(cfg, fit, ds.n, functions_path,
                                covariates_path));
  std::cout << "fit complete: p=" << fit.p << " q=" << fit.q
            << " M=" << fit.truncation << ", outputs in " << out_dir << "\n";
  return 0;
}

struct MetricsRow {
  std::string replicate, scenario, graph, mode;
  int p = 0, n = 0;
  cfgm::ConfusionCounts counts;
  cfgm::EdgeScores sc;
};

int cmd_evaluate(const std::vector<std::string>& run_dirs,
                 const std::string& truth_path, const std::string& out_path) {
  std::vector<MetricsRow> rows;
  for (const auto& dir : run_dirs) {
    const fs::path run(dir);
    const fs::path truth_file =
        truth_path.empty() ? run / "truth.json" : fs::path(truth_path);
    const json truth = read_json(truth_file);
    const int p = truth.at("p").get<int>();
    auto truth_edges = [&](const char* key) {
      std::vector<std::pair<int, int>> pairs;
      for (const auto& e : truth.at(key))
        pairs.emplace_back(e[0].get<int>(), e[1].get<int>());
      return cfgm::EdgeSet::from_pairs(pairs);
    };

    int n = 0;
    if (fs::exists(run / "manifest.json"))
      n = read_json(run / "manifest.json").value("n", 0);
    const std::string scenario = truth.value("scenario", "");

    struct Item {
      const char* file;
      const char* truth_key;
      const char* graph;
    };
    const Item items[] = {{"graph_c0.json", "g0", "G0"},
                          {"graph_c1.json", "g1", "G1"},
                          {"group_graph_c1.json", "group1", "group1"}};
    for (const Item& item : items) {
      if (!fs::exists(run / item.file)) continue;
      const json jg = read_json(run / item.file);
      if (jg.at("p").get<int>() != p)
        throw std::runtime_error(dir + "/" + item.file + ": p=" +
                                 std::to_string(jg.at("p").get<int>()) +
                                 " does not match truth p=" + std::to_string(p));
      MetricsRow row;
      row.replicate = dir;
      row.scenario = scenario;
      row.graph = item.graph;
      row.mode = jg.value("mode", "");
      row.p = p;
      row.n = n;
      row.counts =
          cfgm::confusion(cfgm::edge_set_from_json(jg), truth_edges(item.truth_key), p);
      row.sc = cfgm::scores(row.counts);
      rows.push_back(row);
    }
  }
  if (rows.empty()) throw std::runtime_error("no graph files found to evaluate");

  std::ostringstream out;
  out << "replicate,scenario,p,n,graph,mode,tp,fp,fn,tn,precision,tpr,fpr,f1\n";
  auto emit = [&](const MetricsRow& r) {
    out << r.replicate << ',' << r.scenario << ',' << r.p << ',' << r.n << ','
        << r.graph << ',' << r.mode << ',' << r.counts.tp << ',' << r.counts.fp
        << ',' << r.counts.fn << ',' << r.counts.tn << ','
        << cfgm::format_double(r.sc.precision) << ','
        << cfgm::format_double(r.sc.tpr) << ',' << cfgm::format_double(r.sc.fpr)
        << ',' << cfgm::format_double(r.sc.f1) << '\n';
  };
  for (const auto& r : rows) emit(r);

  // Summary rows (min/mean/max of F1 per graph type) when there are
  // multiple replicates.
  if (run_dirs.size() > 1) {
    for (const char* graph : {"G0", "G1", "group1"}) {
      std::vector<double> f1;
      const MetricsRow* sample = nullptr;
      for (const auto& r : rows)
        if (r.graph == graph) {
          f1.push_back(r.sc.f1);
          sample = &r;
        }
      if (f1.empty()) continue;
      double lo = f1[0], hi = f1[0], mean = 0.0;
      for (double v : f1) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        mean += v;
      }
      mean /= static_cast<double>(f1.size());
      for (auto [stat, value] : {std::pair<const char*, double>{"min", lo},
                                 {"mean", mean},
                                 {"max", hi}})
        out << "summary_" << stat << ',' << sample->scenario << ','
            << sample->p << ',' << sample->n << ',' << graph << ','
            << sample->mode << ",,,,,,,," << cfgm::format_double(value) << '\n';
    }
  }
  if (out_path.empty() || out_path == "-")
    std::cout << out.str();
  else
    write_text(out_path, out.str());
  return 0;
}

int cmd_bench(const std::vector<int>& p_list, int n_per_group,
              const std::string& scenario, std::uint64_t seed, int threads,
              double search_fraction, const std::string& out_path) {
  std::ostringstream out;
  out << "p,n_per_group,scenario,threads,seconds\n";
  for (int p : p_list) {
    const Eigen::MatrixXd theta = cfgm::block_precision_template(p);
    const cfgm::PrecisionPair pair = cfgm::apply_scenario(theta, scenario, p);
    auto [ds, X] = cfgm::sample_dataset(pair, n_per_group, 100, 0.5, seed);
    cfgm::RunConfig cfg;
    cfg.threads = threads;
    cfg.seed = seed;
    cfg.tuning.search_fraction = search_fraction;
    const auto start = std::chrono::steady_clock::now();
    const cfgm::FitResult fit = cfgm::fit_all(ds, X, cfg);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    out << p << ',' << n_per_group << ',' << scenario << ',' << threads << ','
        << cfgm::format_double(secs) << '\n';
    std::cout << "p=" << p << ": " << secs << " s (M=" << fit.truncation
              << ")\n";
  }
  if (out_path.empty() || out_path == "-")
    std::cout << out.str();
  else
    write_text(out_path, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Conditional functional graphical models: population and differential "
      "network estimation from multivariate functional data"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  std::string scenario = "S3";
  int p = 10, n_per_group = 100, m_star = 15, tau = 100;
  double sigma2 = 0.5;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  bool seed_given = false;
  sim->add_option("--scenario", scenario, "Scenario S1..S6")
      ->check(CLI::IsMember({"S1", "S2", "S3", "S4", "S5", "S6"}));
  sim->add_option("--p", p, "Number of nodes")->check(CLI::Range(3, 100000));
  sim->add_option("--n-per-group", n_per_group, "Samples per group");
  sim->add_option("--m-star", m_star, "Basis size of the generator");
  sim->add_option("--tau", tau, "Observation points per curve");
  sim->add_option("--sigma2", sigma2, "Observation noise variance");
  sim->add_option("--seed", seed, "RNG seed (required)")
      ->each([&](const std::string&) { seed_given = true; });
  sim->add_option("--out", out_dir, "Output directory");

  // fit; flags land in locals so that explicit flags can override a
  // config file after parsing.
  auto* fitc = app.add_subcommand("fit", "Estimate conditional graphs");
  std::string functions_path, covariates_path, config_path;
  std::string mode = "OR", basis = "fourier";
  int threads = 1, basis_size = 15, fixed_m = 0, grid_size = 100;
  int lambda_grid = 50, folds = 5;
  double roughness = 0.0, pve = 0.95, lambda_min_ratio = 1e-3;
  double search_fraction = 1.0;
  std::vector<double> epsilon_candidates;
  fitc->add_option("--functions", functions_path, "Functions CSV")->required();
  fitc->add_option("--covariates", covariates_path,
                   "Covariates CSV (omit for an intercept-only fit)");
  fitc->add_option("--config", config_path, "Key=value config file");
  fitc->add_option("--out", out_dir, "Output directory")->required();
  fitc->add_option("--seed", seed, "RNG seed");
  fitc->add_option("--threads", threads, "Worker threads");
  fitc->add_option("--mode", mode, "Symmetrization: OR or AND")
      ->check(CLI::IsMember({"OR", "AND", "or", "and"}));
  fitc->add_option("--basis", basis, "Smoothing basis: fourier or bspline")
      ->check(CLI::IsMember({"fourier", "bspline"}));
  fitc->add_option("--basis-size", basis_size, "Smoothing basis size");
  fitc->add_option("--roughness", roughness, "Smoothing roughness penalty");
  fitc->add_option("--pve", pve, "FPCA explained-variance threshold");
  fitc->add_option("--fixed-m", fixed_m,
                   "Fixed FPCA truncation (overrides --pve)");
  fitc->add_option("--grid-size", grid_size, "Evaluation grid size");
  fitc->add_option("--lambda-grid", lambda_grid, "Penalty grid size");
  fitc->add_option("--lambda-min-ratio", lambda_min_ratio,
                   "Smallest penalty as a fraction of lambda_max");
  fitc->add_option("--folds", folds, "Cross-validation folds");
  fitc->add_option("--search-fraction", search_fraction,
                   "Randomized-search fraction of candidate pairs");
  fitc->add_option("--epsilon-candidates", epsilon_candidates,
                   "Explicit threshold candidates (overrides quantile rule)");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Score estimates against truth");
  std::vector<std::string> run_dirs;
  std::string truth_path, metrics_out;
  eval->add_option("runs", run_dirs, "Run directories with graph files")
      ->required();
  eval->add_option("--truth", truth_path,
                   "truth.json (default: <run>/truth.json)");
  eval->add_option("--out", metrics_out, "Metrics CSV ('-' for stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "Timing table over node counts");
  std::vector<int> p_list = {10, 15, 25, 50};
  int bench_n = 100, bench_threads = 1;
  double bench_fraction = 1.0;
  std::string bench_scenario = "S3", bench_out;
  bench->add_option("--p-list", p_list, "Node counts to time");
  bench->add_option("--n-per-group", bench_n, "Samples per group");
  bench->add_option("--scenario", bench_scenario, "Scenario")
      ->check(CLI::IsMember({"S1", "S2", "S3", "S4", "S5", "S6"}));
  bench->add_option("--seed", seed, "RNG seed");
  bench->add_option("--threads", bench_threads, "Worker threads");
  bench->add_option("--search-fraction", bench_fraction,
                    "Randomized-search fraction");
  bench->add_option("--out", bench_out, "Timing CSV ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) {
      if (!seed_given) {
        std::cerr << "simulate: --seed is required\n";
        return 2;
      }
      return cmd_simulate(scenario, p, n_per_group, m_star, tau, sigma2, seed,
                          out_dir);
    }
    if (fitc->parsed()) {
      cfgm::RunConfig cfg;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw std::runtime_error("cannot read " + config_path);
        std::ostringstream ss;
        ss << in.rdbuf();
        cfgm::apply_config_text(ss.str(), cfg);
      }
      // Explicit flags override the config file.
      auto given = [&](const char* name) { return fitc->count(name) > 0; };
      if (given("--basis"))
        cfg.smoothing.kind = basis == "fourier" ? cfgm::BasisKind::Fourier
                                                : cfgm::BasisKind::BSpline;
      if (given("--basis-size")) cfg.smoothing.size = basis_size;
      if (given("--roughness")) cfg.smoothing.roughness = roughness;
      if (given("--pve")) cfg.fpca.pve = pve;
      if (given("--fixed-m")) cfg.fpca.fixed_m = fixed_m;
      if (given("--grid-size")) cfg.fpca.grid_size = grid_size;
      if (given("--lambda-grid")) cfg.tuning.lambda_grid_size = lambda_grid;
      if (given("--lambda-min-ratio"))
        cfg.tuning.lambda_min_ratio = lambda_min_ratio;
      if (given("--folds")) cfg.tuning.folds = folds;
      if (given("--search-fraction"))
        cfg.tuning.search_fraction = search_fraction;
      if (given("--epsilon-candidates"))
        cfg.tuning.epsilon_candidates = epsilon_candidates;
      if (given("--mode")) cfg.mode = cfgm::symmetrize_mode_from_string(mode);
      if (given("--threads")) cfg.threads = threads;
      if (given("--seed")) cfg.seed = seed;
      return cmd_fit(functions_path, covariates_path, cfg, out_dir);
    }
    if (eval->parsed()) return cmd_evaluate(run_dirs, truth_path, metrics_out);
    if (bench->parsed())
      return cmd_bench(p_list, bench_n, bench_scenario, seed, bench_threads,
                       bench_fraction, bench_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

// Integration tests driving the installed `cfgm` binary end to end.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
  std::cout << (ok ? "[ok]   " : "[FAIL] ") << what << "\n";
  if (!ok) ++failures;
}

int run(const std::string& args) {
  const std::string cmd = std::string(CFGM_CLI_PATH) + " " + args +
                          " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "cfgm_cli_tests";
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string w = work.string();

  // usage errors exit with code 2
  check(run("simulate --scenario BAD --p 6 --seed 1 --out " + w + "/x") == 2,
        "invalid scenario exits with code 2");
  check(run("simulate --p 6 --out " + w + "/x") == 2,
        "missing seed exits with code 2");
  check(run("--help") == 0, "--help exits cleanly");

  // simulate: three files, deterministic bytes
  check(run("simulate --scenario S3 --p 6 --n-per-group 30 --m-star 4 "
            "--tau 40 --seed 7 --out " + w + "/sim_a") == 0,
        "simulate runs");
  check(run("simulate --scenario S3 --p 6 --n-per-group 30 --m-star 4 "
            "--tau 40 --seed 7 --out " + w + "/sim_b") == 0,
        "simulate reruns");
  for (const char* name : {"functions.csv", "covariates.csv", "truth.json"})
    check(fs::exists(work / "sim_a" / name), std::string(name) + " exists");
  check(slurp(work / "sim_a" / "functions.csv") ==
            slurp(work / "sim_b" / "functions.csv"),
        "simulate output is byte-identical across runs");

  // fit with 1 and 4 threads: byte-identical graph files
  const std::string fit_common =
      " --functions " + w + "/sim_a/functions.csv --covariates " + w +
      "/sim_a/covariates.csv --basis-size 4 --grid-size 40 "
      "--lambda-grid 12 --seed 3";
  check(run("fit" + fit_common + " --threads 1 --out " + w + "/fit1") == 0,
        "fit runs single-threaded");
  check(run("fit" + fit_common + " --threads 4 --out " + w + "/fit4") == 0,
        "fit runs multi-threaded");
  for (const char* name :
       {"graph_c0.json", "graph_c1.json", "group_graph_c1.json",
        "nodes.json"})
    check(slurp(work / "fit1" / name) == slurp(work / "fit4" / name),
          std::string(name) + " is independent of the thread count");
  for (const char* name :
       {"graph_c0.csv", "graph_c1.csv", "manifest.json"})
    check(fs::exists(work / "fit1" / name), std::string(name) + " exists");

  // evaluate against the simulated truth
  fs::copy_file(work / "sim_a" / "truth.json", work / "fit1" / "truth.json");
  check(run("evaluate " + w + "/fit1 --out " + w + "/metrics.csv") == 0,
        "evaluate runs");
  const std::string metrics = slurp(work / "metrics.csv");
  check(metrics.find("replicate,scenario,p,n,graph,mode") == 0,
        "metrics header as documented");
  check(metrics.find("G1") != std::string::npos, "metrics cover G1");
  check(metrics.find("group1") != std::string::npos, "metrics cover group1");

  // evaluate with estimate == truth scores F1 = 1 on every graph
  {
    fs::create_directories(work / "perfect");
    std::ifstream in(work / "sim_a" / "truth.json");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string truth = ss.str();
    auto edges_of = [&](const std::string& key) {
      const auto pos = truth.find("\"" + key + "\"");
      const auto open = truth.find('[', pos);
      int depth = 0;
      size_t end = open;
      do {
        if (truth[end] == '[') ++depth;
        if (truth[end] == ']') --depth;
        ++end;
      } while (depth > 0);
      return truth.substr(open, end - open);
    };
    auto write_graph = [&](const std::string& file, const std::string& key) {
      std::ofstream out(work / "perfect" / file);
      out << "{\"p\":6,\"mode\":\"OR\",\"covariate\":0,\"edges\":[";
      const std::string arr = edges_of(key);
      // convert [[u,v],...] to [{"u":u,"v":v},...]
      std::string body;
      for (size_t i = 1; i + 1 < arr.size();) {
        if (arr[i] == '[') {
          const auto comma = arr.find(',', i);
          const auto close = arr.find(']', i);
          if (!body.empty()) body += ',';
          body += "{\"u\":" + arr.substr(i + 1, comma - i - 1) +
                  ",\"v\":" + arr.substr(comma + 1, close - comma - 1) + "}";
          i = close + 1;
        } else {
          ++i;
        }
      }
      out << body << "]}";
    };
    write_graph("graph_c0.json", "g0");
    write_graph("graph_c1.json", "g1");
    write_graph("group_graph_c1.json", "group1");
    fs::copy_file(work / "sim_a" / "truth.json",
                  work / "perfect" / "truth.json");
    check(run("evaluate " + w + "/perfect --out " + w + "/perfect.csv") == 0,
          "evaluate runs on the perfect estimate");
    std::istringstream lines(slurp(work / "perfect.csv"));
    std::string line;
    std::getline(lines, line);  // header
    int rows = 0;
    bool all_one = true;
    while (std::getline(lines, line)) {
      ++rows;
      all_one = all_one && line.substr(line.rfind(',') + 1) == "1";
    }
    check(rows == 3 && all_one, "estimate == truth scores F1 = 1 everywhere");
  }

  // q = 0: fitting without covariates emits only the population graph
  check(run("fit --functions " + w + "/sim_a/functions.csv --basis-size 4 "
            "--grid-size 40 --lambda-grid 12 --seed 3 --out " + w +
            "/fit_q0") == 0,
        "fit runs without covariates");
  check(fs::exists(work / "fit_q0" / "graph_c0.json") &&
            !fs::exists(work / "fit_q0" / "graph_c1.json"),
        "intercept-only fit emits only the population graph");

  // config file + flag precedence: flag wins over config value
  {
    std::ofstream cfg(work / "run.cfg");
    cfg << "tuning.lambda_grid_size = 10\nseed = 11\n";
  }
  check(run("fit" + fit_common + " --config " + w + "/run.cfg --threads 2 "
            "--out " + w + "/fit_cfg") == 0,
        "fit accepts a config file");
  {
    const std::string manifest = slurp(work / "fit_cfg" / "manifest.json");
    check(manifest.find("\"seed\": 3") != std::string::npos,
          "explicit --seed overrides the config file");
    check(manifest.find("tuning.lambda_grid_size = 12") != std::string::npos,
          "explicit --lambda-grid overrides the config file");
  }

  std::cout << (failures == 0 ? "ALL CLI TESTS PASSED\n"
                              : "CLI TEST FAILURES\n");
  return failures == 0 ? 0 : 1;
}

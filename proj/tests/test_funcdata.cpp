#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cfgm/funcdata.hpp"
#include "cfgm/rng.hpp"

using namespace cfgm;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  auto dir = fs::temp_directory_path() / "cfgm_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("load groups rows by sample and node") {
  auto path = temp_file("basic.csv");
  write_file(path,
             "sample_id,node_id,time,value\n"
             "s1,a,0.01,1.5\n"
             "s1,a,0.02,2.5\n"
             "s1,a,0.03,3.5\n");
  const auto ds = load_functional_csv(path.string());
  CHECK(ds.n == 1);
  CHECK(ds.p == 1);
  REQUIRE(ds.at(0, 0).times.size() == 3);
  CHECK(ds.at(0, 0).values[2] == 3.5);
}

TEST_CASE("out-of-order times are sorted ascending") {
  auto path = temp_file("unsorted.csv");
  write_file(path,
             "sample_id,node_id,time,value\n"
             "s1,a,0.03,3.0\n"
             "s1,a,0.01,1.0\n"
             "s1,a,0.02,2.0\n");
  const auto ds = load_functional_csv(path.string());
  const auto& s = ds.at(0, 0);
  CHECK(s.times == std::vector<double>{0.01, 0.02, 0.03});
  CHECK(s.values == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("node ordering is lexicographic") {
  auto path = temp_file("order.csv");
  write_file(path,
             "sample_id,node_id,time,value\n"
             "s1,b,0.1,1\n"
             "s1,a,0.1,2\n"
             "s1,c,0.1,3\n");
  const auto ds = load_functional_csv(path.string());
  CHECK(ds.node_ids == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("loader errors") {
  auto path = temp_file("bad.csv");
  SUBCASE("missing column") {
    write_file(path, "sample_id,node_id,value\ns1,a,1\n");
    CHECK_THROWS_WITH_AS(load_functional_csv(path.string()),
                         doctest::Contains("missing column 'time'"),
                         std::runtime_error);
  }
  SUBCASE("non-numeric value carries the line number") {
    write_file(path,
               "sample_id,node_id,time,value\n"
               "s1,a,0.1,1.0\n"
               "s1,a,0.2,oops\n");
    CHECK_THROWS_WITH_AS(load_functional_csv(path.string()),
                         doctest::Contains("line 3"), std::runtime_error);
  }
  SUBCASE("duplicate (sample, node, time)") {
    write_file(path,
               "sample_id,node_id,time,value\n"
               "s1,a,0.1,1.0\n"
               "s1,a,0.1,2.0\n");
    CHECK_THROWS_WITH_AS(load_functional_csv(path.string()),
                         doctest::Contains("duplicate time"),
                         std::runtime_error);
  }
}

TEST_CASE("times outside the unit interval are rescaled, recording the range") {
  auto path = temp_file("rescale.csv");
  write_file(path,
             "sample_id,node_id,time,value\n"
             "s1,a,10,1\n"
             "s1,a,20,2\n"
             "s1,a,30,3\n");
  const auto ds = load_functional_csv(path.string());
  CHECK(ds.orig_lo == 10.0);
  CHECK(ds.orig_hi == 30.0);
  CHECK(ds.at(0, 0).times == std::vector<double>{0.0, 0.5, 1.0});
}

TEST_CASE("write/load round trip reproduces numeric content exactly") {
  FunctionalDataset ds;
  ds.n = 3;
  ds.p = 2;
  ds.sample_ids = {"s1", "s2", "s3"};
  ds.node_ids = {"a", "b"};
  ds.series.resize(6);
  SplitMix64 rng(77);
  for (auto& s : ds.series) {
    double t = 0.0;
    for (int l = 0; l < 5; ++l) {
      t += rng.uniform() * 0.19;
      s.times.push_back(t);
      s.values.push_back(rng.normal() * 1e3);
    }
  }
  auto path = temp_file("roundtrip.csv");
  write_functional_csv(ds, path.string());
  const auto back = load_functional_csv(path.string());
  REQUIRE(back.n == ds.n);
  REQUIRE(back.p == ds.p);
  for (size_t i = 0; i < ds.series.size(); ++i) {
    CHECK(back.series[i].times == ds.series[i].times);
    CHECK(back.series[i].values == ds.series[i].values);
  }
}

TEST_CASE("EEG-shaped input: 122 samples x 64 nodes") {
  auto path = temp_file("eeg.csv");
  std::ofstream out(path);
  out << "sample_id,node_id,time,value\n";
  for (int i = 0; i < 122; ++i)
    for (int j = 0; j < 64; ++j)
      for (int l = 0; l < 2; ++l)
        out << "s" << 1000 + i << ",ch" << 100 + j << ",0." << l + 1 << ","
            << i + j << "\n";
  out.close();
  const auto ds = load_functional_csv(path.string());
  CHECK(ds.n == 122);
  CHECK(ds.p == 64);
}

TEST_CASE("binary covariate against a reference level") {
  RawCovariateTable table;
  table.sample_ids = {"s1", "s2", "s3"};
  table.var_names = {"group"};
  table.cells = {{"control"}, {"AUD"}, {"control"}};
  CovariateSpec spec;
  spec.vars.push_back({"group", true, "control"});
  const auto d = encode_covariates(table, spec);
  CHECK(d.q() == 1);
  CHECK(d.X.col(0) == Eigen::VectorXd::Ones(3));
  CHECK(d.X(0, 1) == 0.0);
  CHECK(d.X(1, 1) == 1.0);
  CHECK(d.X(2, 1) == 0.0);
  CHECK(d.columns[1].kind == CovariateColumn::Kind::Dummy);
  CHECK(d.columns[1].reference == "control");
}

TEST_CASE("three-level factor gives two dummy columns") {
  RawCovariateTable table;
  table.sample_ids = {"s1", "s2", "s3"};
  table.var_names = {"f"};
  table.cells = {{"A"}, {"B"}, {"C"}};
  CovariateSpec spec;
  spec.vars.push_back({"f", true, "A"});
  const auto d = encode_covariates(table, spec);
  CHECK(d.q() == 2);
  // reference row is all-zero in the dummy block
  CHECK(d.X.row(0).tail(2).cwiseAbs().sum() == 0.0);
}

TEST_CASE("continuous column passes through unchanged") {
  RawCovariateTable table;
  table.sample_ids = {"s1", "s2", "s3"};
  table.var_names = {"age"};
  table.cells = {{"31.5"}, {"44"}, {"58.25"}};
  const auto d = encode_covariates(table);
  CHECK(d.q() == 1);
  CHECK(d.X(0, 1) == 31.5);
  CHECK(d.X(2, 1) == 58.25);
  CHECK(d.columns[1].kind == CovariateColumn::Kind::Continuous);
}

TEST_CASE("encoding errors") {
  RawCovariateTable table;
  table.sample_ids = {"s1", "s2"};
  table.var_names = {"g"};
  SUBCASE("single level") {
    table.cells = {{"x"}, {"x"}};
    CHECK_THROWS_AS(encode_covariates(table), std::runtime_error);
  }
  SUBCASE("reference level not in the data") {
    table.cells = {{"x"}, {"y"}};
    CovariateSpec spec;
    spec.vars.push_back({"g", true, "z"});
    CHECK_THROWS_AS(encode_covariates(table, spec), std::runtime_error);
  }
}

TEST_CASE("encoding is deterministic and dummy blocks sum to 0 or 1") {
  RawCovariateTable table;
  table.var_names = {"f", "age"};
  SplitMix64 rng(5);
  const char* levels[] = {"aa", "bb", "cc", "dd"};
  for (int i = 0; i < 40; ++i) {
    table.sample_ids.push_back("s" + std::to_string(i));
    table.cells.push_back(
        {levels[rng.below(4)], std::to_string(1 + static_cast<int>(rng.below(60)))});
  }
  const auto d1 = encode_covariates(table);
  const auto d2 = encode_covariates(table);
  CHECK(d1.X == d2.X);
  for (size_t c = 0; c < d1.columns.size(); ++c)
    CHECK(d1.columns[c].name == d2.columns[c].name);
  // the dummy block of variable f sums to 0 (reference) or 1 per sample
  for (int i = 0; i < 40; ++i) {
    double sum = 0.0;
    for (int c = 1; c < d1.X.cols(); ++c)
      if (d1.columns[c].kind == CovariateColumn::Kind::Dummy) sum += d1.X(i, c);
    CHECK((sum == 0.0 || sum == 1.0));
  }
}

TEST_CASE("validate flags every invariant violation") {
  FunctionalDataset ds;
  ds.n = 2;
  ds.p = 2;
  ds.sample_ids = {"s1", "s2"};
  ds.node_ids = {"a", "b"};
  ds.series.resize(4);
  for (auto& s : ds.series) {
    s.times = {0.1, 0.2, 0.3};
    s.values = {1.0, 2.0, 3.0};
  }
  SUBCASE("well-formed dataset gives an empty report") {
    CHECK(validate(ds).ok());
  }
  SUBCASE("one NaN value produces one error citing the location") {
    ds.at(1, 0).values[1] = std::nan("");
    const auto report = validate(ds);
    REQUIRE(report.issues.size() == 1);
    CHECK(report.issues[0].location == "sample 's2' node 'a'");
    CHECK(report.issues[0].message == "non-finite value at index 1");
  }
  SUBCASE("sample missing a node is a structural error") {
    ds.at(0, 1).times.clear();
    ds.at(0, 1).values.clear();
    const auto report = validate(ds);
    REQUIRE(report.issues.size() == 1);
    CHECK(report.issues[0].message == "no observations");
  }
  SUBCASE("n < 2 is an error") {
    ds.n = 1;
    ds.series.resize(2);
    ds.sample_ids.resize(1);
    CHECK(validate(ds).has_errors());
  }
}

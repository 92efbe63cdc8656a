#include "cfgm/funcdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cfgm {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CovariateDesign CovariateDesign::intercept_only(int n) {
  CovariateDesign d;
  d.X = Eigen::MatrixXd::Ones(n, 1);
  d.columns.push_back({CovariateColumn::Kind::Intercept, "", "", ""});
  return d;
}

bool ValidationReport::has_errors() const {
  for (const auto& issue : issues)
    if (issue.severity == ValidationIssue::Severity::Error) return true;
  return false;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

// Accepts "nan"/"inf" spellings; non-finite values are caught by validate(),
// not at parse time.
bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

int find_column(const std::vector<std::string>& header, const std::string& name,
                const std::string& path) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    throw std::runtime_error("funcdata: " + path + ": missing column '" + name +
                             "' in header");
  return static_cast<int>(it - header.begin());
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

FunctionalDataset load_functional_csv(const std::string& path,
                                      const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("funcdata: cannot open " + path);

  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("funcdata: " + path + ": empty file");
  const auto header = split_csv_line(strip_cr(line));
  const int c_sample = find_column(header, schema.sample_col, path);
  const int c_node = find_column(header, schema.node_col, path);
  const int c_time = find_column(header, schema.time_col, path);
  const int c_value = find_column(header, schema.value_col, path);
  const size_t min_cols =
      static_cast<size_t>(std::max({c_sample, c_node, c_time, c_value})) + 1;

  // (sample, node) -> series, keyed by id strings
  std::map<std::string, std::map<std::string, std::vector<std::pair<double, double>>>>
      rows;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() < min_cols)
      throw std::runtime_error("funcdata: " + path + ": line " +
                               std::to_string(lineno) + ": too few columns");
    double t, v;
    if (!parse_number(cells[c_time], t) || !std::isfinite(t))
      throw std::runtime_error("funcdata: " + path + ": line " +
                               std::to_string(lineno) + ": non-numeric time '" +
                               cells[c_time] + "'");
    if (!parse_number(cells[c_value], v))
      throw std::runtime_error("funcdata: " + path + ": line " +
                               std::to_string(lineno) + ": non-numeric value '" +
                               cells[c_value] + "'");
    rows[cells[c_sample]][cells[c_node]].emplace_back(t, v);
  }
  if (rows.empty())
    throw std::runtime_error("funcdata: " + path + ": no data rows");

  FunctionalDataset ds;
  std::set<std::string> node_set;
  for (const auto& [sid, nodes] : rows) {
    ds.sample_ids.push_back(sid);
    for (const auto& [nid, _] : nodes) node_set.insert(nid);
  }
  ds.node_ids.assign(node_set.begin(), node_set.end());
  ds.n = static_cast<int>(ds.sample_ids.size());
  ds.p = static_cast<int>(ds.node_ids.size());
  ds.series.resize(static_cast<size_t>(ds.n) * ds.p);

  double tmin = std::numeric_limits<double>::infinity();
  double tmax = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < ds.n; ++i) {
    auto& nodes = rows[ds.sample_ids[i]];
    for (int j = 0; j < ds.p; ++j) {
      auto it = nodes.find(ds.node_ids[j]);
      if (it == nodes.end()) continue;  // left empty; validate() reports it
      auto& pts = it->second;
      std::sort(pts.begin(), pts.end());
      for (size_t l = 1; l < pts.size(); ++l)
        if (pts[l].first == pts[l - 1].first)
          throw std::runtime_error(
              "funcdata: " + path + ": duplicate time " +
              format_double(pts[l].first) + " for sample '" + ds.sample_ids[i] +
              "' node '" + ds.node_ids[j] + "'");
      TimeSeries& s = ds.at(i, j);
      s.times.reserve(pts.size());
      s.values.reserve(pts.size());
      for (auto& [t, v] : pts) {
        s.times.push_back(t);
        s.values.push_back(v);
        tmin = std::min(tmin, t);
        tmax = std::max(tmax, t);
      }
    }
  }

  // Rescale times to the unit interval when the file uses another range.
  ds.orig_lo = 0.0;
  ds.orig_hi = 1.0;
  if (tmin < 0.0 || tmax > 1.0) {
    if (!(tmax > tmin))
      throw std::runtime_error("funcdata: " + path +
                               ": degenerate time range, cannot rescale");
    ds.orig_lo = tmin;
    ds.orig_hi = tmax;
    const double scale = 1.0 / (tmax - tmin);
    for (auto& s : ds.series)
      for (auto& t : s.times) t = (t - tmin) * scale;
  }
  return ds;
}

void write_functional_csv(const FunctionalDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("funcdata: cannot write " + path);
  out << "sample_id,node_id,time,value\n";
  for (int i = 0; i < ds.n; ++i)
    for (int j = 0; j < ds.p; ++j) {
      const TimeSeries& s = ds.at(i, j);
      for (size_t l = 0; l < s.times.size(); ++l)
        out << ds.sample_ids[i] << ',' << ds.node_ids[j] << ','
            << format_double(s.times[l]) << ',' << format_double(s.values[l])
            << '\n';
    }
}

RawCovariateTable load_covariate_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("funcdata: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("funcdata: " + path + ": empty file");
  auto header = split_csv_line(strip_cr(line));
  if (header.empty() || header[0] != "sample_id")
    throw std::runtime_error("funcdata: " + path +
                             ": first header column must be 'sample_id'");
  RawCovariateTable table;
  table.var_names.assign(header.begin() + 1, header.end());
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("funcdata: " + path + ": line " +
                               std::to_string(lineno) +
                               ": wrong number of columns");
    for (const auto& c : cells)
      if (c.empty())
        throw std::runtime_error("funcdata: " + path + ": line " +
                                 std::to_string(lineno) + ": missing cell");
    table.sample_ids.push_back(cells[0]);
    table.cells.emplace_back(cells.begin() + 1, cells.end());
  }
  return table;
}

RawCovariateTable reorder_rows(const RawCovariateTable& table,
                               const std::vector<std::string>& sample_ids) {
  std::map<std::string, size_t> pos;
  for (size_t r = 0; r < table.sample_ids.size(); ++r) {
    if (!pos.emplace(table.sample_ids[r], r).second)
      throw std::runtime_error("funcdata: duplicate covariate row for sample '" +
                               table.sample_ids[r] + "'");
  }
  RawCovariateTable out;
  out.var_names = table.var_names;
  for (const auto& sid : sample_ids) {
    auto it = pos.find(sid);
    if (it == pos.end())
      throw std::runtime_error("funcdata: no covariate row for sample '" + sid +
                               "'");
    out.sample_ids.push_back(sid);
    out.cells.push_back(table.cells[it->second]);
  }
  return out;
}

CovariateDesign encode_covariates(const RawCovariateTable& table,
                                  const CovariateSpec& spec) {
  const int n = static_cast<int>(table.sample_ids.size());
  const int nvars = static_cast<int>(table.var_names.size());
  if (n == 0) throw std::runtime_error("funcdata: empty covariate table");

  // Resolve the per-variable spec; unspecified variables are inferred:
  // all-numeric columns are continuous, anything else categorical.
  std::vector<CovariateSpec::Var> vars(nvars);
  for (int v = 0; v < nvars; ++v) {
    vars[v].name = table.var_names[v];
    const CovariateSpec::Var* given = nullptr;
    for (const auto& sv : spec.vars)
      if (sv.name == table.var_names[v]) given = &sv;
    if (given) {
      vars[v] = *given;
    } else {
      bool numeric = true;
      double tmp;
      for (int i = 0; i < n && numeric; ++i)
        numeric = parse_number(table.cells[i][v], tmp);
      vars[v].categorical = !numeric;
    }
  }

  std::vector<Eigen::VectorXd> cols;
  std::vector<CovariateColumn> meta;
  for (int v = 0; v < nvars; ++v) {
    if (!vars[v].categorical) {
      Eigen::VectorXd col(n);
      for (int i = 0; i < n; ++i) {
        double x;
        if (!parse_number(table.cells[i][v], x))
          throw std::runtime_error("funcdata: variable '" + vars[v].name +
                                   "': non-numeric value '" +
                                   table.cells[i][v] + "'");
        col[i] = x;
      }
      cols.push_back(col);
      meta.push_back({CovariateColumn::Kind::Continuous, vars[v].name, "", ""});
      continue;
    }
    std::set<std::string> level_set;
    for (int i = 0; i < n; ++i) level_set.insert(table.cells[i][v]);
    std::vector<std::string> levels(level_set.begin(), level_set.end());
    if (levels.size() < 2)
      throw std::runtime_error("funcdata: categorical variable '" +
                               vars[v].name +
                               "' has a single level, cannot encode");
    std::string ref = vars[v].reference.empty() ? levels[0] : vars[v].reference;
    if (!level_set.count(ref))
      throw std::runtime_error("funcdata: variable '" + vars[v].name +
                               "': reference level '" + ref +
                               "' not present in the data");
    for (const auto& level : levels) {
      if (level == ref) continue;
      Eigen::VectorXd col(n);
      for (int i = 0; i < n; ++i) col[i] = table.cells[i][v] == level ? 1.0 : 0.0;
      cols.push_back(col);
      meta.push_back({CovariateColumn::Kind::Dummy, vars[v].name, level, ref});
    }
  }

  CovariateDesign d;
  d.X.resize(n, static_cast<int>(cols.size()) + 1);
  d.X.col(0).setOnes();
  d.columns.push_back({CovariateColumn::Kind::Intercept, "", "", ""});
  for (size_t c = 0; c < cols.size(); ++c) {
    d.X.col(static_cast<int>(c) + 1) = cols[c];
    d.columns.push_back(meta[c]);
  }
  for (int c = 1; c < d.X.cols(); ++c) {
    if ((d.X.col(c).array() == d.X(0, c)).all())
      throw std::runtime_error("funcdata: covariate column '" +
                               d.columns[c].name +
                               "' is constant; drop it or recode");
  }
  return d;
}

ValidationReport validate(const FunctionalDataset& ds) {
  ValidationReport report;
  auto error = [&](std::string loc, std::string msg) {
    report.issues.push_back(
        {ValidationIssue::Severity::Error, std::move(loc), std::move(msg)});
  };

  if (ds.n < 2) error("dataset", "need at least 2 samples, have " +
                                     std::to_string(ds.n));
  if (ds.p < 2)
    error("dataset", "need at least 2 nodes, have " + std::to_string(ds.p));
  if (ds.series.size() != static_cast<size_t>(ds.n) * ds.p)
    error("dataset", "series storage does not match n*p");

  for (int i = 0; i < ds.n; ++i)
    for (int j = 0; j < ds.p && static_cast<size_t>(i * ds.p + j) < ds.series.size();
         ++j) {
      const TimeSeries& s = ds.at(i, j);
      const std::string loc =
          "sample '" + ds.sample_ids[i] + "' node '" + ds.node_ids[j] + "'";
      if (s.times.empty()) {
        error(loc, "no observations");
        continue;
      }
      if (s.times.size() != s.values.size()) {
        error(loc, "times/values length mismatch");
        continue;
      }
      for (size_t l = 0; l < s.times.size(); ++l) {
        if (!std::isfinite(s.values[l]))
          error(loc, "non-finite value at index " + std::to_string(l));
        if (!std::isfinite(s.times[l]))
          error(loc, "non-finite time at index " + std::to_string(l));
        else if (l > 0 && s.times[l] <= s.times[l - 1])
          error(loc, "times not strictly increasing at index " +
                         std::to_string(l));
      }
    }
  return report;
}

}  // namespace cfgm

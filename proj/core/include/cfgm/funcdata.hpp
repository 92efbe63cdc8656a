#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace cfgm {

/// One discretely observed curve: strictly increasing times with values.
struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;
};

/// n samples x p nodes of discretely observed curves on a common domain.
///
/// Series are stored row-major by (sample, node). Node ids are ordered
/// lexicographically and all matrices/graphs downstream index nodes in this
/// order. Times are affinely rescaled to the unit interval on load when the
/// source file uses another range; the original interval is recorded.
struct FunctionalDataset {
  int n = 0;
  int p = 0;
  std::vector<std::string> sample_ids;  // size n, lexicographic
  std::vector<std::string> node_ids;    // size p, lexicographic
  std::vector<TimeSeries> series;       // size n*p, index i*p + j
  double orig_lo = 0.0;                 // interval of the source times
  double orig_hi = 1.0;

  TimeSeries& at(int sample, int node) { return series[sample * p + node]; }
  const TimeSeries& at(int sample, int node) const {
    return series[sample * p + node];
  }
};

struct CovariateColumn {
  enum class Kind { Intercept, Continuous, Dummy };
  Kind kind = Kind::Continuous;
  std::string name;       // variable name ("" for the intercept)
  std::string category;   // dummy: the level this column indicates
  std::string reference;  // dummy: the reference level of the variable
};

/// n x (q+1) covariate matrix with x_{i,0} = 1 and per-column metadata.
struct CovariateDesign {
  Eigen::MatrixXd X;  // first column identically one
  std::vector<CovariateColumn> columns;

  int n() const { return static_cast<int>(X.rows()); }
  int q() const { return static_cast<int>(X.cols()) - 1; }

  /// Intercept-only design for n samples.
  static CovariateDesign intercept_only(int n);
};

struct ValidationIssue {
  enum class Severity { Warning, Error };
  Severity severity = Severity::Error;
  std::string location;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  bool has_errors() const;
};

/// Column mapping for the long-format functions CSV.
struct CsvSchema {
  std::string sample_col = "sample_id";
  std::string node_col = "node_id";
  std::string time_col = "time";
  std::string value_col = "value";
};

/// Raw (string-valued) covariate table, one row per sample.
struct RawCovariateTable {
  std::vector<std::string> sample_ids;
  std::vector<std::string> var_names;            // q columns
  std::vector<std::vector<std::string>> cells;   // rows x q
};

/// Per-variable encoding choice for encode_covariates.
struct CovariateSpec {
  struct Var {
    std::string name;
    bool categorical = false;
    std::string reference;  // categorical: reference level ("" = smallest)
  };
  std::vector<Var> vars;  // empty -> all variables inferred from content
};

/// Load long-format curves: header `sample_id,node_id,time,value`.
/// Rows are grouped by (sample, node) and sorted by time; duplicate
/// (sample, node, time) rows and non-numeric cells are errors.
FunctionalDataset load_functional_csv(const std::string& path,
                                      const CsvSchema& schema = {});

/// Write the dataset back in the canonical long format (17 significant
/// digits, so load(write(ds)) round-trips numerically).
void write_functional_csv(const FunctionalDataset& ds, const std::string& path);

/// Load the covariate table: header `sample_id,<var1>,...,<varq>`.
RawCovariateTable load_covariate_csv(const std::string& path);

/// Reorder table rows to match `sample_ids`; every id must be present once.
RawCovariateTable reorder_rows(const RawCovariateTable& table,
                               const std::vector<std::string>& sample_ids);

/// Encode continuous columns as-is and categorical variables as l-1 dummy
/// columns against the reference level, with the intercept prepended.
CovariateDesign encode_covariates(const RawCovariateTable& table,
                                  const CovariateSpec& spec = {});

/// Check every FunctionalDataset invariant; an empty report means the
/// dataset is fit for smoothing and estimation.
ValidationReport validate(const FunctionalDataset& ds);

/// Format a double with 17 significant digits (round-trip safe).
std::string format_double(double v);

}  // namespace cfgm

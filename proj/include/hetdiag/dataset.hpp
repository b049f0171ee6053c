#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "hetdiag/errors.hpp"

namespace hetdiag {

// One observation per row: outcome y, binary treatment d (values exactly
// 0 or 1) and covariate matrix x with one column per covariate.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::VectorXd d;
  Eigen::MatrixXd x;
  std::string outcome_name = "y";
  std::string treatment_name = "d";
  std::vector<std::string> covariate_names;

  Eigen::Index n() const { return y.size(); }
  Eigen::Index n_covariates() const { return x.cols(); }
  Eigen::Index n_treated() const {
    return static_cast<Eigen::Index>(d.sum() + 0.5);
  }
};

struct ValidationReport {
  std::size_t n_read = 0;     // data rows in the file
  std::size_t n_kept = 0;     // rows surviving listwise deletion
  std::size_t n_dropped = 0;  // rows removed for missing cells
  std::map<std::string, std::size_t> missing_by_column;  // selected columns
  std::vector<double> treatment_levels;  // distinct values, ascending
};

struct LoadResult {
  Dataset data;
  ValidationReport report;
};

// Returns the header row of a CSV file, in file order.
std::vector<std::string> csv_header(const std::string& path);

// Expands a comma-separated covariate spec against the file's column order.
// A token "a:b" selects every column from a through b inclusive.
std::vector<std::string> expand_covariate_spec(
    const std::string& spec, const std::vector<std::string>& header);

// Loads the selected columns from a CSV file. Cells that are empty or "."
// count as missing; a row missing any selected cell is dropped. The
// treatment column is accepted only when its distinct values are exactly
// {0, 1} and both occur.
LoadResult load_csv(const std::string& path, const std::string& outcome,
                    const std::string& treatment,
                    const std::vector<std::string>& covariates);

// Builds an in-memory dataset and runs the same structural checks load_csv
// applies after parsing.
Dataset make_dataset(Eigen::VectorXd y, Eigen::VectorXd d, Eigen::MatrixXd x,
                     std::string outcome_name = "y",
                     std::string treatment_name = "d",
                     std::vector<std::string> covariate_names = {});

// Structural invariants: consistent sizes, finite values, d in {0, 1} with
// both groups present, and n >= n_covariates + 2.
void validate(const Dataset& ds);

// Row subset in the given order (used by resampling).
Dataset take_rows(const Dataset& ds, const std::vector<Eigen::Index>& rows);

}  // namespace hetdiag

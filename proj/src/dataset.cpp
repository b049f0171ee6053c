#include "hetdiag/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace hetdiag {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool is_missing(const std::string& cell) { return cell.empty() || cell == "."; }

double parse_cell(const std::string& cell, const std::string& column,
                  std::size_t line_no) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = first + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw Error(ErrorCode::schema, "cannot parse value '" + cell +
                                       "' in column '" + column + "' (line " +
                                       std::to_string(line_no) + ")");
  }
  return v;
}

std::size_t column_index(const std::vector<std::string>& header,
                         const std::string& name) {
  std::size_t hit = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {
      if (hit != header.size()) {
        throw Error(ErrorCode::schema,
                    "column '" + name + "' appears more than once");
      }
      hit = i;
    }
  }
  if (hit == header.size()) {
    std::string known;
    for (const auto& h : header) known += (known.empty() ? "" : ", ") + h;
    throw Error(ErrorCode::schema,
                "no column named '" + name + "' (columns: " + known + ")");
  }
  return hit;
}

}  // namespace

std::vector<std::string> csv_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::schema, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::schema, "'" + path + "' is empty");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    line.erase(0, 3);
  }
  auto header = split_fields(line);
  if (header.empty()) throw Error(ErrorCode::schema, "header row is empty");
  return header;
}

std::vector<std::string> expand_covariate_spec(
    const std::string& spec, const std::vector<std::string>& header) {
  std::vector<std::string> out;
  std::string token;
  std::stringstream ss(spec);
  while (std::getline(ss, token, ',')) {
    token = trim(token);
    if (token.empty()) continue;
    auto colon = token.find(':');
    if (colon == std::string::npos) {
      out.push_back(token);
      continue;
    }
    auto lo = column_index(header, trim(token.substr(0, colon)));
    auto hi = column_index(header, trim(token.substr(colon + 1)));
    if (lo > hi) {
      throw Error(ErrorCode::schema,
                  "range '" + token + "' runs against the file's column order");
    }
    for (std::size_t i = lo; i <= hi; ++i) out.push_back(header[i]);
  }
  if (out.empty()) {
    throw Error(ErrorCode::schema, "covariate list '" + spec + "' is empty");
  }
  return out;
}

LoadResult load_csv(const std::string& path, const std::string& outcome,
                    const std::string& treatment,
                    const std::vector<std::string>& covariates) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::schema, "cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::schema, "'" + path + "' is empty");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    line.erase(0, 3);
  }
  const auto header = split_fields(line);

  // Selected columns, in the order y, d, x1, .., xK. Reject overlaps: a
  // column may serve only one role.
  std::vector<std::string> selected{outcome, treatment};
  selected.insert(selected.end(), covariates.begin(), covariates.end());
  std::vector<std::size_t> indices;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (selected[i] == selected[j]) {
        throw Error(ErrorCode::schema,
                    "column '" + selected[i] + "' selected more than once");
      }
    }
    indices.push_back(column_index(header, selected[i]));
  }

  ValidationReport report;
  for (const auto& name : selected) report.missing_by_column[name] = 0;

  std::vector<std::vector<double>> kept;  // one inner vector per kept row
  std::vector<double> row(selected.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++report.n_read;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::schema,
                  "line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, header has " +
                      std::to_string(header.size()));
    }
    bool drop = false;
    for (std::size_t i = 0; i < indices.size(); ++i) {
      if (is_missing(fields[indices[i]])) {
        ++report.missing_by_column[selected[i]];
        drop = true;
      }
    }
    if (drop) {
      ++report.n_dropped;
      continue;
    }
    for (std::size_t i = 0; i < indices.size(); ++i) {
      row[i] = parse_cell(fields[indices[i]], selected[i], line_no);
    }
    kept.push_back(row);
  }
  report.n_kept = kept.size();

  const Eigen::Index n = static_cast<Eigen::Index>(kept.size());
  const Eigen::Index k = static_cast<Eigen::Index>(covariates.size());
  if (n < k + 2) {
    throw Error(ErrorCode::schema,
                "only " + std::to_string(n) + " complete rows for " +
                    std::to_string(k) + " covariates; need at least " +
                    std::to_string(k + 2));
  }

  Dataset ds;
  ds.y.resize(n);
  ds.d.resize(n);
  ds.x.resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    ds.y(i) = kept[i][0];
    ds.d(i) = kept[i][1];
    for (Eigen::Index j = 0; j < k; ++j) ds.x(i, j) = kept[i][2 + j];
  }
  ds.outcome_name = outcome;
  ds.treatment_name = treatment;
  ds.covariate_names = covariates;

  std::set<double> levels(ds.d.data(), ds.d.data() + ds.d.size());
  report.treatment_levels.assign(levels.begin(), levels.end());
  for (double v : levels) {
    if (v != 0.0 && v != 1.0) {
      std::string seen;
      for (double u : levels) {
        if (seen.size() > 40) { seen += ", .."; break; }
        seen += (seen.empty() ? "" : ", ") + std::to_string(u);
      }
      throw Error(ErrorCode::treatment_not_binary,
                  "treatment '" + treatment + "' takes values {" + seen +
                      "}; need exactly {0, 1}");
    }
  }

  validate(ds);
  return {std::move(ds), std::move(report)};
}

Dataset make_dataset(Eigen::VectorXd y, Eigen::VectorXd d, Eigen::MatrixXd x,
                     std::string outcome_name, std::string treatment_name,
                     std::vector<std::string> covariate_names) {
  Dataset ds;
  ds.y = std::move(y);
  ds.d = std::move(d);
  ds.x = std::move(x);
  ds.outcome_name = std::move(outcome_name);
  ds.treatment_name = std::move(treatment_name);
  if (covariate_names.empty()) {
    for (Eigen::Index j = 0; j < ds.x.cols(); ++j) {
      ds.covariate_names.push_back("x" + std::to_string(j + 1));
    }
  } else {
    ds.covariate_names = std::move(covariate_names);
  }
  validate(ds);
  return ds;
}

void validate(const Dataset& ds) {
  const Eigen::Index n = ds.y.size();
  if (ds.d.size() != n || ds.x.rows() != n) {
    throw Error(ErrorCode::schema, "y, d and x disagree on the row count");
  }
  if (static_cast<Eigen::Index>(ds.covariate_names.size()) != ds.x.cols()) {
    throw Error(ErrorCode::schema, "covariate names do not match x columns");
  }
  if (n < ds.x.cols() + 2) {
    throw Error(ErrorCode::schema,
                "need at least n_covariates + 2 rows, have " +
                    std::to_string(n));
  }
  if (!ds.y.allFinite() || !ds.x.allFinite()) {
    throw Error(ErrorCode::schema, "non-finite value in outcome or covariates");
  }
  Eigen::Index n1 = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (ds.d(i) != 0.0 && ds.d(i) != 1.0) {
      throw Error(ErrorCode::treatment_not_binary,
                  "treatment value " + std::to_string(ds.d(i)) + " at row " +
                      std::to_string(i));
    }
    n1 += ds.d(i) == 1.0;
  }
  if (n1 == 0 || n1 == n) {
    throw Error(ErrorCode::degenerate_group,
                n1 == 0 ? "no treated rows" : "no untreated rows");
  }
}

Dataset take_rows(const Dataset& ds, const std::vector<Eigen::Index>& rows) {
  Dataset out;
  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  out.y.resize(m);
  out.d.resize(m);
  out.x.resize(m, ds.x.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    out.y(i) = ds.y(rows[i]);
    out.d(i) = ds.d(rows[i]);
    out.x.row(i) = ds.x.row(rows[i]);
  }
  out.outcome_name = ds.outcome_name;
  out.treatment_name = ds.treatment_name;
  out.covariate_names = ds.covariate_names;
  return out;
}

}  // namespace hetdiag

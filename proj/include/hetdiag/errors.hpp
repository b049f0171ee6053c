#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hetdiag {

enum class ErrorCode {
  schema,
  treatment_not_binary,
  degenerate_group,
  rank_deficient,
  nonpositive_weight,
  assumption2,
  identity_broken,
  no_variation,
  bad_config,
  too_many_failures,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised when a design matrix is numerically rank deficient. Carries the
// zero-based indices of the dependent columns so callers may drop them and
// refit instead of silently reparameterizing.
class RankError : public Error {
 public:
  RankError(const std::string& message, std::vector<std::ptrdiff_t> columns)
      : Error(ErrorCode::rank_deficient, message),
        columns_(std::move(columns)) {}

  const std::vector<std::ptrdiff_t>& dependent_columns() const noexcept {
    return columns_;
  }

 private:
  std::vector<std::ptrdiff_t> columns_;
};

}  // namespace hetdiag

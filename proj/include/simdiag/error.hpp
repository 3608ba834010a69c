#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace simdiag {

enum class ErrorCategory {
  invalid_argument,
  dimension_mismatch,
  non_finite,
  parse_error,
  io_error,
  not_converged,
  single_class,
  diverged,
  no_valid_repeat,
};

// Stable machine-readable name, used as the CLI error prefix.
std::string_view category_name(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

// Raised by the single-matrix eigensolver; carries the off ratio it reached.
class NotConverged : public Error {
 public:
  NotConverged(const std::string& message, double achieved_off_ratio)
      : Error(ErrorCategory::not_converged, message),
        achieved_off_ratio_(achieved_off_ratio) {}

  double achieved_off_ratio() const noexcept { return achieved_off_ratio_; }

 private:
  double achieved_off_ratio_;
};

// Prefixes a message with the pipeline stage that raised it.
Error with_stage(std::string_view stage, const Error& inner);

}  // namespace simdiag

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gbi {

enum class ErrorCode {
  InvalidArgument,
  InvalidDistribution,
  UnknownVariable,
  ImpossibleEvidence,
  InfeasibleConstraintSet,
  ConstraintOutOfRange,
  ZeroCondition,
  UndeterminedCondition,
  NotNextKey,
  IncompleteConstraints,
  ConflictingEvidence,
  NotEvidenceVariable,
  InvalidNet,
  InconsistentNet,
  SchemaError,
  UnsupportedVersion,
  NotFound,
};

std::string_view to_string(ErrorCode code) noexcept;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double v, double slack = 0.0) const noexcept {
    return v >= lo - slack && v <= hi + slack;
  }
};

// All library failures are reported through this type. `interval` is set for
// ConstraintOutOfRange, `path` for SchemaError.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  static Error out_of_range(double value, Interval allowed);
  static Error schema(std::string path, const std::string& reason);

  ErrorCode code() const noexcept { return code_; }
  const std::optional<Interval>& interval() const noexcept { return interval_; }
  const std::string& path() const noexcept { return path_; }

 private:
  ErrorCode code_;
  std::optional<Interval> interval_;
  std::string path_;
};

}  // namespace gbi

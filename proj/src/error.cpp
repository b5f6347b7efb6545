#include "gbi/error.hpp"

#include <cstdio>

namespace gbi {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::ImpossibleEvidence: return "ImpossibleEvidence";
    case ErrorCode::InfeasibleConstraintSet: return "InfeasibleConstraintSet";
    case ErrorCode::ConstraintOutOfRange: return "ConstraintOutOfRange";
    case ErrorCode::ZeroCondition: return "ZeroCondition";
    case ErrorCode::UndeterminedCondition: return "UndeterminedCondition";
    case ErrorCode::NotNextKey: return "NotNextKey";
    case ErrorCode::IncompleteConstraints: return "IncompleteConstraints";
    case ErrorCode::ConflictingEvidence: return "ConflictingEvidence";
    case ErrorCode::NotEvidenceVariable: return "NotEvidenceVariable";
    case ErrorCode::InvalidNet: return "InvalidNet";
    case ErrorCode::InconsistentNet: return "InconsistentNet";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::NotFound: return "NotFound";
  }
  return "Unknown";
}

Error Error::out_of_range(double value, Interval allowed) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "value %.17g outside feasible interval [%.17g, %.17g]", value,
                allowed.lo, allowed.hi);
  Error e(ErrorCode::ConstraintOutOfRange, buf);
  e.interval_ = allowed;
  return e;
}

Error Error::schema(std::string path, const std::string& reason) {
  Error e(ErrorCode::SchemaError, path + ": " + reason);
  e.path_ = std::move(path);
  return e;
}

}  // namespace gbi

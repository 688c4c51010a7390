#include "covplan/error.hpp"

namespace covplan {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateDesign: return "degenerate design";
    case ErrorKind::InsufficientData: return "insufficient data";
    case ErrorKind::RankDeficient: return "rank deficient";
    case ErrorKind::InvalidContrast: return "invalid contrast";
    case ErrorKind::DomainError: return "domain error";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::MissingColumn: return "missing column";
    case ErrorKind::InvalidData: return "invalid data";
  }
  return "error";
}

}  // namespace covplan

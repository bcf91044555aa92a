#include "armid/core/error.hpp"

namespace armid {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Range: return "range";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::UnsupportedFeature: return "unsupported";
    case ErrorKind::IllConditioned: return "ill-conditioned";
    case ErrorKind::InfeasibleWorkspace: return "infeasible-workspace";
    case ErrorKind::Config: return "config";
    case ErrorKind::DegenerateDataset: return "degenerate-dataset";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::TrainingDiverged: return "training-diverged";
    case ErrorKind::Contract: return "contract";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace armid

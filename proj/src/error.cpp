#include "scin/error.hpp"

namespace scin {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::invalid_shape: return "invalid-shape";
    case ErrorKind::invalid_range: return "invalid-range";
    case ErrorKind::invalid_hyperparameter: return "invalid-hyperparameter";
    case ErrorKind::invalid_label: return "invalid-label";
    case ErrorKind::invalid_parameter: return "invalid-parameter";
    case ErrorKind::shape_mismatch: return "shape";
    case ErrorKind::config: return "config";
    case ErrorKind::manifest: return "manifest";
    case ErrorKind::ingest: return "ingest";
    case ErrorKind::too_small: return "too-small";
    case ErrorKind::stratification: return "stratification";
    case ErrorKind::evaluation: return "evaluation";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::io: return "io";
    case ErrorKind::corrupt_checkpoint: return "corrupt-checkpoint";
    }
    return "unknown";
}

DivergenceError::DivergenceError(int epoch, int batch, double loss)
    : Error(ErrorKind::divergence, "training diverged: non-finite loss " + std::to_string(loss) +
                                       " at epoch " + std::to_string(epoch) + ", batch " +
                                       std::to_string(batch)),
      epoch_(epoch), batch_(batch) {}

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::manifest:
    case ErrorKind::ingest:
    case ErrorKind::too_small:
    case ErrorKind::stratification:
        return 3;
    case ErrorKind::divergence:
        return 4;
    case ErrorKind::io:
        return 5;
    case ErrorKind::corrupt_checkpoint:
        return 6;
    default:
        return 2;
    }
}

}  // namespace scin

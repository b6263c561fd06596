#include "atlantis/core/error.hpp"

namespace atlantis {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::missing_file: return "MissingFile";
    case Errc::unsupported_format: return "UnsupportedFormat";
    case Errc::non_rgb: return "NonRgb";
    case Errc::io_failure: return "IoFailure";
    case Errc::range_overflow: return "RangeOverflow";
    case Errc::missing_sidecar: return "MissingSidecar";
    case Errc::corrupt_sidecar: return "CorruptSidecar";
    case Errc::duplicate_id: return "DuplicateId";
    case Errc::parse_failure: return "ParseFailure";
    case Errc::backend_failure: return "BackendFailure";
    case Errc::empty_caption: return "EmptyCaption";
    case Errc::empty_input_dir: return "EmptyInputDir";
    case Errc::empty_triplets: return "EmptyTriplets";
    case Errc::checkpoint_mismatch: return "CheckpointMismatch";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::non_positive_threshold: return "NonPositiveThreshold";
    case Errc::missing_conditioning_depth: return "MissingConditioningDepth";
    case Errc::manifest_invalid: return "ManifestInvalid";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::empty_valid_set: return "EmptyValidSet";
    case Errc::non_positive_prediction: return "NonPositivePrediction";
    case Errc::empty_results: return "EmptyResults";
    case Errc::degenerate_depth: return "DegenerateDepth";
    case Errc::fit_failure: return "FitFailure";
    case Errc::config_error: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace atlantis

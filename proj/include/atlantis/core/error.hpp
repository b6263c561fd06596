#pragma once

#include <stdexcept>
#include <string>

namespace atlantis {

enum class Errc {
  missing_file,
  unsupported_format,
  non_rgb,
  io_failure,
  range_overflow,
  missing_sidecar,
  corrupt_sidecar,
  duplicate_id,
  parse_failure,
  backend_failure,
  empty_caption,
  empty_input_dir,
  empty_triplets,
  checkpoint_mismatch,
  invalid_config,
  non_positive_threshold,
  missing_conditioning_depth,
  manifest_invalid,
  shape_mismatch,
  empty_valid_set,
  non_positive_prediction,
  empty_results,
  degenerate_depth,
  fit_failure,
  config_error,
};

const char* errc_name(Errc code);

/// Exception carrying a stable error code alongside the message.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace atlantis

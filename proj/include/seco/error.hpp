#pragma once

#include <stdexcept>
#include <string>

namespace seco {

enum class Errc {
  zero_vector,
  not_normalized,
  empty_input,
  non_positive_temperature,
  shape_mismatch,
  invalid_threshold,
  patch_larger_than_image,
  mask_shape_mismatch,
  uninitialized_prototype,
  batch_exceeds_capacity,
  length_mismatch,
  no_positives,
  missing_prototype,
  non_finite_component,
  no_true_positives,
  invalid_config,
  bad_snapshot,
};

const char* errc_name(Errc code);

/// Library-wide exception; carries a stable error code for callers that
/// dispatch on failure kind rather than message text.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace seco

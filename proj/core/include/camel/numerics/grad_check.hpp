#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "camel/numerics/param_store.hpp"

namespace camel {

struct GradCheckOptions {
  double eps = 1e-5;
  double tolerance = 1e-4;
  // Tensors with more elements than this are checked on a seeded random
  // subset of `max_elements_per_tensor` indices.
  std::size_t max_elements_per_tensor = 24;
  std::uint64_t seed = 0;
  // Denominator floor of the relative error, so near-zero gradients are
  // compared in absolute terms.
  double relative_floor = 1e-6;
  // Rounding in the loss puts about rounding_factor * u * |loss| / eps of
  // noise on each difference quotient; errors within it count as agreement.
  double rounding_factor = 10.0;
  // Elements whose +-eps evaluations flip a relu are skipped; the check
  // fails when they exceed this fraction of the attempted elements.
  double max_kink_fraction = 0.1;
};

struct GradCheckReport {
  bool passed = false;
  bool aborted = false;
  std::string diagnostic;
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  std::size_t elements_checked = 0;
  std::size_t kinks_skipped = 0;
};

using LossFn = std::function<Tensor()>;

/// Compares reverse-mode gradients of `loss_fn` w.r.t. every entry of
/// `params` with central finite differences. Parameter values are restored
/// before returning.
GradCheckReport grad_check(const LossFn& loss_fn, ParamStore& params,
                           const GradCheckOptions& options = {});

}  // namespace camel

#pragma once

#include <array>

#include "camel/numerics/tensor.hpp"
#include "camel/training/config.hpp"

namespace camel {

/// Scalar loss tensors; an undefined tensor means the component is absent
/// (no language-wise CTC without MoE, no LD term without the LD decoder).
struct LossTerms {
  Tensor ctc;
  Tensor en_ctc;
  Tensor cn_ctc;
  Tensor ce;
  Tensor ld_ce;
};

struct LossValues {
  double total = 0.0;
  double ctc = 0.0;
  double en_ctc = 0.0;
  double cn_ctc = 0.0;
  double ce = 0.0;
  double ld_ce = 0.0;
};

/// Coefficients of (ctc, en_ctc, cn_ctc, ce, ld_ce) in
///   L = lambda (alpha (en + cn) / 2 + (1 - alpha) ctc) + (1 - lambda) ce + beta ld_ce,
/// with alpha forced to 0 when there is no language-wise CTC and the beta
/// term dropped without an LD decoder.
std::array<double, 5> loss_coefficients(const LossWeights& w, bool language_ctc, bool ld);

/// Weighted total. Throws NonFiniteError naming the first non-finite
/// component.
Tensor total_loss(const LossTerms& terms, const LossWeights& w);

double total_loss(double ctc, double en_ctc, double cn_ctc, double ce, double ld_ce,
                  const LossWeights& w);

}  // namespace camel

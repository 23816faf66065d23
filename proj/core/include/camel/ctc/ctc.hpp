#pragma once

#include <optional>
#include <span>
#include <vector>

#include "camel/numerics/tensor.hpp"

namespace camel {

inline constexpr int kCtcBlank = 0;

/// log(exp(a) + exp(b)) without leaving log space; -inf is the log of zero.
double log_add(double a, double b);

/// Minimum number of frames that can emit `labels`: one per label plus one
/// separating blank between each pair of equal neighbours.
std::size_t ctc_min_frames(std::span<const int> labels);

/// Negative log-likelihood of `labels` under softmax(`logits`) ([T, V]),
/// summed over every alignment with the forward algorithm in log space.
/// Gradients w.r.t. the logits come from the forward-backward posteriors.
/// Throws InfeasibleTargetError when T < ctc_min_frames(labels) and
/// InvalidTokenError for blank or out-of-range labels.
Tensor ctc_loss(const Tensor& logits, std::span<const int> labels);

struct Hypothesis {
  std::vector<int> tokens;
  double ctc_score = 0.0;  // log P(tokens | frames), <= 0
  std::optional<double> att_score;
};

/// CTC prefix beam search over per-frame log-distributions ([T, V]). Keeps
/// the `beam` prefixes with the largest total (blank + non-blank) log mass
/// after every frame and returns them sorted by that mass, best first.
std::vector<Hypothesis> ctc_prefix_beam_search(const Tensor& logprobs, std::size_t beam);

/// Collapse repeats, then drop blanks.
std::vector<int> ctc_collapse(std::span<const int> frame_labels);

}  // namespace camel

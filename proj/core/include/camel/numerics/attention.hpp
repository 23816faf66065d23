#pragma once

#include <random>
#include <string>
#include <vector>

#include "camel/numerics/ops.hpp"
#include "camel/numerics/param_store.hpp"

namespace camel {

/// Projections of one multi-head attention block. All weights are [d, d]
/// (input x output) with [d] biases; heads split the projected columns into
/// contiguous groups of d/heads. Keys carry no bias: it would add the same
/// constant to every score in a row and cancel in the softmax.
struct AttentionParams {
  Tensor wq, bq, wk, wv, bv, wo, bo;
  std::size_t heads = 1;

  std::size_t dim() const { return wq.rows(); }
  std::size_t head_dim() const { return dim() / heads; }

  // Registers `<prefix>.{wq,bq,...}` in `store`.
  static AttentionParams create(ParamStore& store, const std::string& prefix,
                                std::size_t d, std::size_t heads, std::mt19937_64& rng);
  static AttentionParams bind(const ParamStore& store, const std::string& prefix,
                              std::size_t heads);
};

struct AttentionResult {
  Tensor output;
  std::vector<Tensor> weights;  // one [Tq, Tk] matrix per head
};

/// Scaled dot-product attention per head with scale 1/sqrt(d/heads), heads
/// concatenated and output-projected.
Tensor multi_head_attention(const Tensor& q_in, const Tensor& k_in, const Tensor& v_in,
                            const AttentionParams& params, const Mask* mask = nullptr);

AttentionResult multi_head_attention_with_weights(const Tensor& q_in, const Tensor& k_in,
                                                  const Tensor& v_in,
                                                  const AttentionParams& params,
                                                  const Mask* mask = nullptr);

}  // namespace camel

#include "camel/numerics/attention.hpp"

#include <cmath>

#include "camel/errors.hpp"

namespace camel {

AttentionParams AttentionParams::create(ParamStore& store, const std::string& prefix,
                                        std::size_t d, std::size_t heads,
                                        std::mt19937_64& rng) {
  if (heads == 0 || d % heads != 0) {
    throw ConfigError("attention " + prefix + ": model dim " + std::to_string(d) +
                      " not divisible by " + std::to_string(heads) + " heads");
  }
  AttentionParams p;
  p.heads = heads;
  p.wq = store.create(prefix + ".wq", {d, d}, Init::kUniformFanIn, rng);
  p.bq = store.create(prefix + ".bq", {d}, Init::kZeros, rng);
  p.wk = store.create(prefix + ".wk", {d, d}, Init::kUniformFanIn, rng);
  p.wv = store.create(prefix + ".wv", {d, d}, Init::kUniformFanIn, rng);
  p.bv = store.create(prefix + ".bv", {d}, Init::kZeros, rng);
  p.wo = store.create(prefix + ".wo", {d, d}, Init::kUniformFanIn, rng);
  p.bo = store.create(prefix + ".bo", {d}, Init::kZeros, rng);
  return p;
}

AttentionParams AttentionParams::bind(const ParamStore& store, const std::string& prefix,
                                      std::size_t heads) {
  AttentionParams p;
  p.heads = heads;
  p.wq = store.get(prefix + ".wq");
  p.bq = store.get(prefix + ".bq");
  p.wk = store.get(prefix + ".wk");
  p.wv = store.get(prefix + ".wv");
  p.bv = store.get(prefix + ".bv");
  p.wo = store.get(prefix + ".wo");
  p.bo = store.get(prefix + ".bo");
  return p;
}

AttentionResult multi_head_attention_with_weights(const Tensor& q_in, const Tensor& k_in,
                                                  const Tensor& v_in,
                                                  const AttentionParams& params,
                                                  const Mask* mask) {
  const std::size_t d = params.dim();
  if (params.heads == 0 || d % params.heads != 0) {
    throw ConfigError("attention: model dim " + std::to_string(d) + " not divisible by " +
                      std::to_string(params.heads) + " heads");
  }
  if (k_in.rows() != v_in.rows()) {
    throw DimensionError("attention: key rows " + shape_string(k_in.shape()) +
                         " vs value rows " + shape_string(v_in.shape()));
  }
  if (mask && (mask->rows() != q_in.rows() || mask->cols() != k_in.rows())) {
    throw DimensionError("attention: mask " + std::to_string(mask->rows()) + "x" +
                         std::to_string(mask->cols()) + " for " + std::to_string(q_in.rows()) +
                         " queries and " + std::to_string(k_in.rows()) + " keys");
  }

  const Tensor q = linear(q_in, params.wq, params.bq);
  const Tensor k = linear(k_in, params.wk);
  const Tensor v = linear(v_in, params.wv, params.bv);

  const std::size_t dh = params.head_dim();
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  AttentionResult result;
  std::vector<Tensor> heads;
  heads.reserve(params.heads);
  for (std::size_t h = 0; h < params.heads; ++h) {
    const std::size_t b = h * dh, e = b + dh;
    Tensor scores = scale(matmul_nt(slice_cols(q, b, e), slice_cols(k, b, e)), inv_sqrt);
    Tensor w = softmax_rows(scores, mask);
    heads.push_back(matmul(w, slice_cols(v, b, e)));
    result.weights.push_back(std::move(w));
  }
  const Tensor joined = heads.size() == 1 ? heads.front() : concat_cols(heads);
  result.output = linear(joined, params.wo, params.bo);
  return result;
}

Tensor multi_head_attention(const Tensor& q_in, const Tensor& k_in, const Tensor& v_in,
                            const AttentionParams& params, const Mask* mask) {
  return multi_head_attention_with_weights(q_in, k_in, v_in, params, mask).output;
}

}  // namespace camel

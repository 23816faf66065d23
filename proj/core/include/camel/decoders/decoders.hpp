#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

#include "camel/ctc/ctc.hpp"
#include "camel/dataio/vocabulary.hpp"
#include "camel/numerics/attention.hpp"
#include "camel/numerics/param_store.hpp"

namespace camel {

struct DecoderConfig {
  std::size_t n_layers = 2;
  std::size_t d = 64;
  std::size_t heads = 2;
  std::size_t ffn_dim = 128;
  std::size_t vocab_size = 0;
  bool ld_enabled = true;

  static DecoderConfig full_preset();
  static DecoderConfig desk_preset();
  void validate() const;
};

/// Standard pre-norm Transformer decoder layer: causal self-attention,
/// attention over a memory sequence, feed-forward; each with a residual.
struct DecoderLayerParams {
  Tensor norm_self_g, norm_self_b;
  AttentionParams self_att;
  Tensor norm_src_g, norm_src_b;
  AttentionParams src_att;
  Tensor norm_ffn_g, norm_ffn_b;
  Tensor ffn_w1, ffn_b1, ffn_w2, ffn_b2;

  static DecoderLayerParams create(ParamStore& store, const std::string& prefix,
                                   const DecoderConfig& cfg, std::mt19937_64& rng);
  static DecoderLayerParams bind(const ParamStore& store, const std::string& prefix,
                                 const DecoderConfig& cfg);
};

Tensor decoder_layer_forward(const Tensor& x, const Tensor& memory, const DecoderLayerParams& p);

/// Embedding, decoder layers, final norm and output projection.
struct DecoderStackParams {
  Tensor embed;  // [V, d]
  std::vector<DecoderLayerParams> layers;
  Tensor final_norm_g, final_norm_b;
  Tensor out_w, out_b;

  static DecoderStackParams create(ParamStore& store, const std::string& prefix,
                                   const DecoderConfig& cfg, std::mt19937_64& rng);
  static DecoderStackParams bind(const ParamStore& store, const std::string& prefix,
                                 const DecoderConfig& cfg);
};

// Scaled embedding plus sinusoidal positions.
Tensor embed_tokens(std::span<const int> ids, const Tensor& table);

/// Causal self-attention and src-attention used to bias text embeddings
/// with the LD decoder's hidden states.
struct LanguageBiasParams {
  AttentionParams self_att;
  AttentionParams src_att;

  static LanguageBiasParams create(ParamStore& store, const std::string& prefix,
                                   const DecoderConfig& cfg, std::mt19937_64& rng);
  static LanguageBiasParams bind(const ParamStore& store, const std::string& prefix,
                                 const DecoderConfig& cfg);
};

struct LdOutput {
  Tensor h_ld;         // [S, d], final hidden states before the projection
  Tensor lang_logits;  // [S, V]
};

/// Teacher-forced LD decoder over [sos] + `lang_tokens`; every token must be
/// <EN> or <CN>.
LdOutput ld_decoder_forward(std::span<const int> lang_tokens, const Tensor& encoder_out,
                            const DecoderStackParams& params);

/// x' = e + CausalMHSA(e);  y = x' + MHSrcAttention(Q = x', K = V = h_ld).
Tensor bias_text_embeddings(const Tensor& text_emb, const Tensor& h_ld,
                            const LanguageBiasParams& params);

/// Teacher-forced main decoder over [sos] + `text_tokens`. `h_ld` must be
/// defined exactly when `bias` is given.
Tensor main_decoder_forward(std::span<const int> text_tokens, const Tensor& h_ld,
                            const Tensor& encoder_out, const DecoderStackParams& params,
                            const LanguageBiasParams* bias);

/// Both decoders plus the bias block. Parameter names: decoder.main.*,
/// decoder.ld.*, decoder.bias.*.
class Decoders {
 public:
  Decoders(const DecoderConfig& cfg, ParamStore& store, std::mt19937_64& rng);
  Decoders(const DecoderConfig& cfg, const ParamStore& store);

  const DecoderConfig& config() const { return cfg_; }

  LdOutput ld_forward(std::span<const int> lang_tokens, const Tensor& encoder_out) const;
  Tensor main_forward(std::span<const int> text_tokens, const Tensor& h_ld,
                      const Tensor& encoder_out) const;

  // Runs the LD decoder (when enabled) on the derived language sequence and
  // returns main-decoder logits.
  Tensor text_logits(std::span<const int> text_tokens, const Vocabulary& vocab,
                     const Tensor& encoder_out) const;

 private:
  DecoderConfig cfg_;
  DecoderStackParams main_;
  DecoderStackParams ld_;
  LanguageBiasParams bias_;
};

/// Sum of log-probabilities of `tokens` followed by eos, teacher-forced.
double attention_score(std::span<const int> tokens, const Vocabulary& vocab,
                       const Tensor& encoder_out, const Decoders& decoders);

struct RescoreOptions {
  double ctc_weight = 0.5;
  // Divide att_score by (tokens + 1) before combining.
  bool length_normalize = false;
};

/// Fills att_score on every hypothesis and returns the index of the argmax
/// of att_score + ctc_weight * ctc_score; ties go to the lower index.
std::size_t attention_rescoring(std::vector<Hypothesis>& hyps, const Vocabulary& vocab,
                                const Tensor& encoder_out, const Decoders& decoders,
                                const RescoreOptions& options = {});

}  // namespace camel

#include "camel/decoders/decoders.hpp"

#include <cmath>

#include "camel/dataio/language.hpp"
#include "camel/encoder/encoder.hpp"
#include "camel/errors.hpp"
#include "camel/numerics/ops.hpp"

namespace camel {

DecoderConfig DecoderConfig::full_preset() {
  DecoderConfig c;
  c.n_layers = 6;
  c.d = 256;
  c.heads = 4;
  c.ffn_dim = 1024;
  return c;
}

DecoderConfig DecoderConfig::desk_preset() { return DecoderConfig{}; }

void DecoderConfig::validate() const {
  if (n_layers == 0) throw ConfigError("decoder: n_layers must be positive");
  if (d == 0 || heads == 0 || d % heads != 0) {
    throw ConfigError("decoder: d=" + std::to_string(d) + " must be a positive multiple of heads=" +
                      std::to_string(heads));
  }
  if (vocab_size <= static_cast<std::size_t>(Vocabulary::kNumReserved)) {
    throw ConfigError("decoder: vocabulary of " + std::to_string(vocab_size) +
                      " entries has no ordinary tokens");
  }
}

DecoderLayerParams DecoderLayerParams::create(ParamStore& store, const std::string& prefix,
                                              const DecoderConfig& cfg, std::mt19937_64& rng) {
  DecoderLayerParams p;
  p.norm_self_g = store.create(prefix + ".norm_self.gamma", {cfg.d}, Init::kOnes, rng);
  p.norm_self_b = store.create(prefix + ".norm_self.beta", {cfg.d}, Init::kZeros, rng);
  p.self_att = AttentionParams::create(store, prefix + ".self_att", cfg.d, cfg.heads, rng);
  p.norm_src_g = store.create(prefix + ".norm_src.gamma", {cfg.d}, Init::kOnes, rng);
  p.norm_src_b = store.create(prefix + ".norm_src.beta", {cfg.d}, Init::kZeros, rng);
  p.src_att = AttentionParams::create(store, prefix + ".src_att", cfg.d, cfg.heads, rng);
  p.norm_ffn_g = store.create(prefix + ".norm_ffn.gamma", {cfg.d}, Init::kOnes, rng);
  p.norm_ffn_b = store.create(prefix + ".norm_ffn.beta", {cfg.d}, Init::kZeros, rng);
  p.ffn_w1 = store.create(prefix + ".ffn.w1", {cfg.d, cfg.ffn_dim}, Init::kUniformFanIn, rng);
  p.ffn_b1 = store.create(prefix + ".ffn.b1", {cfg.ffn_dim}, Init::kZeros, rng);
  p.ffn_w2 = store.create(prefix + ".ffn.w2", {cfg.ffn_dim, cfg.d}, Init::kUniformFanIn, rng);
  p.ffn_b2 = store.create(prefix + ".ffn.b2", {cfg.d}, Init::kZeros, rng);
  return p;
}

DecoderLayerParams DecoderLayerParams::bind(const ParamStore& store, const std::string& prefix,
                                            const DecoderConfig& cfg) {
  DecoderLayerParams p;
  p.norm_self_g = store.get(prefix + ".norm_self.gamma");
  p.norm_self_b = store.get(prefix + ".norm_self.beta");
  p.self_att = AttentionParams::bind(store, prefix + ".self_att", cfg.heads);
  p.norm_src_g = store.get(prefix + ".norm_src.gamma");
  p.norm_src_b = store.get(prefix + ".norm_src.beta");
  p.src_att = AttentionParams::bind(store, prefix + ".src_att", cfg.heads);
  p.norm_ffn_g = store.get(prefix + ".norm_ffn.gamma");
  p.norm_ffn_b = store.get(prefix + ".norm_ffn.beta");
  p.ffn_w1 = store.get(prefix + ".ffn.w1");
  p.ffn_b1 = store.get(prefix + ".ffn.b1");
  p.ffn_w2 = store.get(prefix + ".ffn.w2");
  p.ffn_b2 = store.get(prefix + ".ffn.b2");
  return p;
}

Tensor decoder_layer_forward(const Tensor& x, const Tensor& memory, const DecoderLayerParams& p) {
  const Mask causal = Mask::causal(x.rows());
  const Tensor a = layer_norm(x, p.norm_self_g, p.norm_self_b);
  const Tensor h1 = add(x, multi_head_attention(a, a, a, p.self_att, &causal));
  const Tensor b = layer_norm(h1, p.norm_src_g, p.norm_src_b);
  const Tensor h2 = add(h1, multi_head_attention(b, memory, memory, p.src_att));
  const Tensor f = layer_norm(h2, p.norm_ffn_g, p.norm_ffn_b);
  return add(h2, linear(relu(linear(f, p.ffn_w1, p.ffn_b1)), p.ffn_w2, p.ffn_b2));
}

DecoderStackParams DecoderStackParams::create(ParamStore& store, const std::string& prefix,
                                              const DecoderConfig& cfg, std::mt19937_64& rng) {
  DecoderStackParams p;
  p.embed = store.create(prefix + ".embed", {cfg.vocab_size, cfg.d}, Init::kUniformFanIn, rng);
  for (std::size_t i = 0; i < cfg.n_layers; ++i) {
    p.layers.push_back(
        DecoderLayerParams::create(store, prefix + ".layers." + std::to_string(i), cfg, rng));
  }
  p.final_norm_g = store.create(prefix + ".final_norm.gamma", {cfg.d}, Init::kOnes, rng);
  p.final_norm_b = store.create(prefix + ".final_norm.beta", {cfg.d}, Init::kZeros, rng);
  p.out_w = store.create(prefix + ".out.weight", {cfg.d, cfg.vocab_size}, Init::kUniformFanIn, rng);
  p.out_b = store.create(prefix + ".out.bias", {cfg.vocab_size}, Init::kZeros, rng);
  return p;
}

DecoderStackParams DecoderStackParams::bind(const ParamStore& store, const std::string& prefix,
                                            const DecoderConfig& cfg) {
  DecoderStackParams p;
  p.embed = store.get(prefix + ".embed");
  for (std::size_t i = 0; i < cfg.n_layers; ++i) {
    p.layers.push_back(DecoderLayerParams::bind(store, prefix + ".layers." + std::to_string(i), cfg));
  }
  p.final_norm_g = store.get(prefix + ".final_norm.gamma");
  p.final_norm_b = store.get(prefix + ".final_norm.beta");
  p.out_w = store.get(prefix + ".out.weight");
  p.out_b = store.get(prefix + ".out.bias");
  return p;
}

LanguageBiasParams LanguageBiasParams::create(ParamStore& store, const std::string& prefix,
                                              const DecoderConfig& cfg, std::mt19937_64& rng) {
  return {AttentionParams::create(store, prefix + ".self_att", cfg.d, cfg.heads, rng),
          AttentionParams::create(store, prefix + ".src_att", cfg.d, cfg.heads, rng)};
}

LanguageBiasParams LanguageBiasParams::bind(const ParamStore& store, const std::string& prefix,
                                            const DecoderConfig& cfg) {
  return {AttentionParams::bind(store, prefix + ".self_att", cfg.heads),
          AttentionParams::bind(store, prefix + ".src_att", cfg.heads)};
}

Tensor embed_tokens(std::span<const int> ids, const Tensor& table) {
  const std::size_t d = table.cols();
  return add(embedding(table, ids),
             sinusoidal_positions(ids.size(), d));
}

namespace {

std::vector<int> with_sos(std::span<const int> tokens) {
  std::vector<int> in{Vocabulary::kSosEos};
  in.insert(in.end(), tokens.begin(), tokens.end());
  return in;
}

Tensor run_stack(const Tensor& x0, const Tensor& memory, const DecoderStackParams& p) {
  Tensor x = x0;
  for (const auto& layer : p.layers) x = decoder_layer_forward(x, memory, layer);
  return layer_norm(x, p.final_norm_g, p.final_norm_b);
}

}  // namespace

LdOutput ld_decoder_forward(std::span<const int> lang_tokens, const Tensor& encoder_out,
                            const DecoderStackParams& params) {
  for (int t : lang_tokens) {
    if (t != Vocabulary::kLangEn && t != Vocabulary::kLangCn) {
      throw InvalidTokenError("LD decoder input " + std::to_string(t) + " is not <EN> or <CN>");
    }
  }
  const auto in = with_sos(lang_tokens);
  LdOutput out;
  out.h_ld = run_stack(embed_tokens(in, params.embed), encoder_out, params);
  out.lang_logits = linear(out.h_ld, params.out_w, params.out_b);
  return out;
}

Tensor bias_text_embeddings(const Tensor& text_emb, const Tensor& h_ld,
                            const LanguageBiasParams& params) {
  if (text_emb.cols() != h_ld.cols()) {
    throw DimensionError("bias_text_embeddings: " + shape_string(text_emb.shape()) + " vs " +
                         shape_string(h_ld.shape()));
  }
  const Mask causal = Mask::causal(text_emb.rows());
  const Tensor x =
      add(text_emb, multi_head_attention(text_emb, text_emb, text_emb, params.self_att, &causal));
  return add(x, multi_head_attention(x, h_ld, h_ld, params.src_att));
}

Tensor main_decoder_forward(std::span<const int> text_tokens, const Tensor& h_ld,
                            const Tensor& encoder_out, const DecoderStackParams& params,
                            const LanguageBiasParams* bias) {
  if (bias && !h_ld.defined()) {
    throw ConfigError("main decoder: language bias enabled but no LD hidden states given");
  }
  const auto in = with_sos(text_tokens);
  Tensor x = embed_tokens(in, params.embed);
  if (bias) x = bias_text_embeddings(x, h_ld, *bias);
  return linear(run_stack(x, encoder_out, params), params.out_w, params.out_b);
}

Decoders::Decoders(const DecoderConfig& cfg, ParamStore& store, std::mt19937_64& rng) : cfg_(cfg) {
  cfg_.validate();
  main_ = DecoderStackParams::create(store, "decoder.main", cfg_, rng);
  if (cfg_.ld_enabled) {
    ld_ = DecoderStackParams::create(store, "decoder.ld", cfg_, rng);
    bias_ = LanguageBiasParams::create(store, "decoder.bias", cfg_, rng);
  }
}

Decoders::Decoders(const DecoderConfig& cfg, const ParamStore& store) : cfg_(cfg) {
  cfg_.validate();
  main_ = DecoderStackParams::bind(store, "decoder.main", cfg_);
  if (cfg_.ld_enabled) {
    ld_ = DecoderStackParams::bind(store, "decoder.ld", cfg_);
    bias_ = LanguageBiasParams::bind(store, "decoder.bias", cfg_);
  }
}

LdOutput Decoders::ld_forward(std::span<const int> lang_tokens, const Tensor& encoder_out) const {
  if (!cfg_.ld_enabled) throw ConfigError("LD decoder is disabled in this configuration");
  return ld_decoder_forward(lang_tokens, encoder_out, ld_);
}

Tensor Decoders::main_forward(std::span<const int> text_tokens, const Tensor& h_ld,
                              const Tensor& encoder_out) const {
  return main_decoder_forward(text_tokens, h_ld, encoder_out, main_,
                              cfg_.ld_enabled ? &bias_ : nullptr);
}

Tensor Decoders::text_logits(std::span<const int> text_tokens, const Vocabulary& vocab,
                             const Tensor& encoder_out) const {
  Tensor h_ld;
  if (cfg_.ld_enabled) {
    h_ld = ld_forward(derive_language_sequence(text_tokens, vocab), encoder_out).h_ld;
  }
  return main_forward(text_tokens, h_ld, encoder_out);
}

}  // namespace camel

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "camel/dataio/synth.hpp"
#include "camel/decoders/decoders.hpp"
#include "camel/encoder/encoder.hpp"

namespace camel {

/// Ablation ladder. Each step adds one component to the previous one:
///   baseline  plain encoder, CTC + attention decoder
///   s1        MoE adapters with language-wise CTC, no fusion
///   s2        + linear gating unit
///   s3        linear gate replaced by gated cross-attention
///   camel     + LD decoder with attention-based language bias
enum class Variant { kBaseline, kS1, kS2, kS3, kCamel };

const char* variant_name(Variant v);
Variant parse_variant(const std::string& name);

struct LossWeights {
  double lambda = 0.3;
  double alpha = 0.3;
  double beta = 0.8;

  void validate() const;
};

struct ModelConfig {
  EncoderConfig encoder = EncoderConfig::desk_preset();
  DecoderConfig decoder = DecoderConfig::desk_preset();
  Variant variant = Variant::kCamel;

  // Sets the MoE/fusion/LD switches implied by `variant`.
  void apply_variant();
  bool language_ctc() const { return encoder.moe_enabled; }
  void validate() const;

  // FNV-1a over a canonical rendering of every architecture field.
  std::uint64_t hash() const;

  static ModelConfig desk(Variant v, std::size_t vocab_size, std::size_t feature_dim);
};

struct TrainConfig {
  std::size_t epochs = 30;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t batch_size = 8;
  std::size_t warmup_steps = 0;  // linear warmup, off by default
  double grad_clip = 0.0;        // global-norm clipping, off when 0
  std::uint64_t seed = 1;
  std::size_t average_last_k = 5;

  void validate() const;
};

/// Everything a config file can carry. Sections: [model] [encoder] [decoder]
/// [loss] [train] [synth], each holding `key = value` lines.
struct Config {
  ModelConfig model;
  LossWeights loss;
  TrainConfig train;
  SynthSpec synth;

  static Config load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

}  // namespace camel

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "camel/ctc/ctc.hpp"
#include "camel/dataio/manifest.hpp"
#include "camel/decoders/decoders.hpp"
#include "camel/encoder/encoder.hpp"
#include "camel/training/config.hpp"
#include "camel/training/loss.hpp"

namespace camel {

/// Component losses of one utterance plus their weighted total.
struct LossBreakdown {
  Tensor total;
  LossValues values;
};

struct DecodeResult {
  std::vector<Hypothesis> hypotheses;  // CTC beam order
  std::size_t best = 0;
  double combined_score = 0.0;

  const Hypothesis& best_hypothesis() const { return hypotheses[best]; }
};

/// Encoder, CTC heads (main, plus EN/CN when MoE is on) and decoders over
/// one ParamStore. CTC head names: ctc.main.*, ctc.en.*, ctc.cn.*.
class CamelModel {
 public:
  CamelModel(const ModelConfig& cfg, std::uint64_t seed);
  CamelModel(const CamelModel&) = delete;
  CamelModel& operator=(const CamelModel&) = delete;

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const Encoder& encoder() const { return encoder_; }
  const Decoders& decoders() const { return decoders_; }

  EncoderOutput encode(const Tensor& features) const;
  Tensor ctc_logits(const Tensor& h) const;

  LossBreakdown loss(const Utterance& utt, const Vocabulary& vocab,
                     const LossWeights& weights) const;

  DecodeResult decode(const Tensor& features, const Vocabulary& vocab, std::size_t beam,
                      const RescoreOptions& options) const;

 private:
  ModelConfig cfg_;
  ParamStore params_;
  std::mt19937_64 init_rng_;
  Encoder encoder_;
  Tensor ctc_w_, ctc_b_, en_w_, en_b_, cn_w_, cn_b_;
  Decoders decoders_;
};

}  // namespace camel

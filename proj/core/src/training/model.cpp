#include "camel/training/model.hpp"

#include "camel/dataio/language.hpp"
#include "camel/errors.hpp"
#include "camel/numerics/ops.hpp"

namespace camel {

namespace {

ModelConfig checked(ModelConfig cfg) {
  cfg.validate();
  return cfg;
}

}  // namespace

CamelModel::CamelModel(const ModelConfig& cfg, std::uint64_t seed)
    : cfg_(checked(cfg)),
      init_rng_(seed),
      encoder_(cfg_.encoder, params_, init_rng_),
      ctc_w_(params_.create("ctc.main.weight", {cfg_.encoder.d, cfg_.decoder.vocab_size},
                            Init::kUniformFanIn, init_rng_)),
      ctc_b_(params_.create("ctc.main.bias", {cfg_.decoder.vocab_size}, Init::kZeros, init_rng_)),
      decoders_(cfg_.decoder, params_, init_rng_) {
  if (cfg_.language_ctc()) {
    const std::size_t d = cfg_.encoder.d, v = cfg_.decoder.vocab_size;
    en_w_ = params_.create("ctc.en.weight", {d, v}, Init::kUniformFanIn, init_rng_);
    en_b_ = params_.create("ctc.en.bias", {v}, Init::kZeros, init_rng_);
    cn_w_ = params_.create("ctc.cn.weight", {d, v}, Init::kUniformFanIn, init_rng_);
    cn_b_ = params_.create("ctc.cn.bias", {v}, Init::kZeros, init_rng_);
  }
}

EncoderOutput CamelModel::encode(const Tensor& features) const { return encoder_.encode(features); }

Tensor CamelModel::ctc_logits(const Tensor& h) const { return linear(h, ctc_w_, ctc_b_); }

LossBreakdown CamelModel::loss(const Utterance& utt, const Vocabulary& vocab,
                               const LossWeights& weights) const {
  if (vocab.size() != cfg_.decoder.vocab_size) {
    throw ConfigError("vocabulary has " + std::to_string(vocab.size()) +
                      " entries but the model was built for " +
                      std::to_string(cfg_.decoder.vocab_size));
  }
  const EncoderOutput enc = encode(utt.features.frames);
  LossTerms terms;
  terms.ctc = ctc_loss(ctc_logits(enc.h_out), utt.tokens);
  if (cfg_.language_ctc()) {
    terms.en_ctc = ctc_loss(linear(enc.h_en_avg, en_w_, en_b_),
                            derive_langwise_ctc_targets(utt.tokens, vocab, Lang::kEn));
    terms.cn_ctc = ctc_loss(linear(enc.h_cn_avg, cn_w_, cn_b_),
                            derive_langwise_ctc_targets(utt.tokens, vocab, Lang::kCn));
  }

  std::vector<int> text_targets(utt.tokens);
  text_targets.push_back(Vocabulary::kSosEos);
  Tensor h_ld;
  if (cfg_.decoder.ld_enabled) {
    const auto langs = derive_language_sequence(utt.tokens, vocab);
    const LdOutput ld = decoders_.ld_forward(langs, enc.h_out);
    std::vector<int> lang_targets(langs);
    lang_targets.push_back(Vocabulary::kSosEos);
    terms.ld_ce = cross_entropy(ld.lang_logits, lang_targets);
    h_ld = ld.h_ld;
  }
  terms.ce = cross_entropy(decoders_.main_forward(utt.tokens, h_ld, enc.h_out), text_targets);

  LossBreakdown out;
  out.total = total_loss(terms, weights);
  out.values.total = out.total.item();
  out.values.ctc = terms.ctc.item();
  out.values.ce = terms.ce.item();
  if (terms.en_ctc.defined()) {
    out.values.en_ctc = terms.en_ctc.item();
    out.values.cn_ctc = terms.cn_ctc.item();
  }
  if (terms.ld_ce.defined()) out.values.ld_ce = terms.ld_ce.item();
  return out;
}

DecodeResult CamelModel::decode(const Tensor& features, const Vocabulary& vocab, std::size_t beam,
                                const RescoreOptions& options) const {
  NoGradGuard no_grad;
  const EncoderOutput enc = encode(features);
  DecodeResult out;
  out.hypotheses = ctc_prefix_beam_search(log_softmax_rows(ctc_logits(enc.h_out)), beam);
  out.best = attention_rescoring(out.hypotheses, vocab, enc.h_out, decoders_, options);
  const Hypothesis& best = out.hypotheses[out.best];
  double att = *best.att_score;
  if (options.length_normalize) att /= static_cast<double>(best.tokens.size() + 1);
  out.combined_score = att + options.ctc_weight * best.ctc_score;
  return out;
}

}  // namespace camel

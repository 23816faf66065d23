#include "camel/decoders/decoders.hpp"
#include "camel/errors.hpp"
#include "camel/numerics/ops.hpp"

namespace camel {

double attention_score(std::span<const int> tokens, const Vocabulary& vocab,
                       const Tensor& encoder_out, const Decoders& decoders) {
  NoGradGuard no_grad;
  const Tensor logp = log_softmax_rows(decoders.text_logits(tokens, vocab, encoder_out));
  double score = 0.0;
  for (std::size_t i = 0; i <= tokens.size(); ++i) {
    const int next = i < tokens.size() ? tokens[i] : Vocabulary::kSosEos;
    score += logp.at(i, static_cast<std::size_t>(next));
  }
  return score;
}

std::size_t attention_rescoring(std::vector<Hypothesis>& hyps, const Vocabulary& vocab,
                                const Tensor& encoder_out, const Decoders& decoders,
                                const RescoreOptions& options) {
  if (hyps.empty()) throw DecodeError("attention rescoring: no hypotheses");
  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    auto& h = hyps[i];
    h.att_score = attention_score(h.tokens, vocab, encoder_out, decoders);
    double att = *h.att_score;
    if (options.length_normalize) att /= static_cast<double>(h.tokens.size() + 1);
    const double combined = att + options.ctc_weight * h.ctc_score;
    if (i == 0 || combined > best_score) {
      best = i;
      best_score = combined;
    }
  }
  return best;
}

}  // namespace camel

#include "camel/dataio/language.hpp"

namespace camel {

std::vector<Lang> languages_of(std::span<const int> tokens, const Vocabulary& vocab) {
  std::vector<Lang> out;
  out.reserve(tokens.size());
  for (int t : tokens) out.push_back(vocab.language(t));
  return out;
}

std::vector<int> derive_language_sequence(std::span<const int> tokens, const Vocabulary& vocab) {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (int t : tokens) out.push_back(Vocabulary::lang_token(vocab.language(t)));
  return out;
}

std::vector<int> derive_langwise_ctc_targets(std::span<const int> tokens, const Vocabulary& vocab,
                                             Lang which) {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (int t : tokens) {
    const Lang lang = vocab.language(t);
    out.push_back(lang == which ? t : Vocabulary::lang_token(lang));
  }
  return out;
}

}  // namespace camel

#pragma once

#include <span>
#include <vector>

#include "camel/dataio/vocabulary.hpp"

namespace camel {

/// <CN> for every CN-role token, <EN> for every EN-role token.
std::vector<int> derive_language_sequence(std::span<const int> tokens, const Vocabulary& vocab);

/// Language-wise CTC target for the `which` expert: tokens of the other
/// language are replaced by that language's placeholder id, own-language
/// tokens pass through. Length is preserved (no merging of placeholders).
std::vector<int> derive_langwise_ctc_targets(std::span<const int> tokens, const Vocabulary& vocab,
                                             Lang which);

std::vector<Lang> languages_of(std::span<const int> tokens, const Vocabulary& vocab);

}  // namespace camel

#pragma once

#include <span>
#include <string>
#include <vector>

#include "camel/dataio/vocabulary.hpp"

namespace camel {

enum class EditKind { kMatch, kSubstitute, kDelete, kInsert };

struct AlignmentOp {
  EditKind kind;
  int ref_index = -1;  // -1 for insertions
  int hyp_index = -1;  // -1 for deletions
};

/// Unit-cost minimum edit alignment. The backtrace prefers, among moves
/// that stay on an optimal path, match, then substitute, then delete, then
/// insert.
std::vector<AlignmentOp> align(std::span<const int> ref, std::span<const int> hyp);

/// Plain Levenshtein distance.
std::size_t edit_distance(std::span<const int> ref, std::span<const int> hyp);

struct ErrorCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_tokens = 0;
  std::size_t cn_errors = 0;
  std::size_t cn_ref_tokens = 0;
  std::size_t en_errors = 0;
  std::size_t en_ref_tokens = 0;
  bool empty_reference = false;

  std::size_t errors() const { return substitutions + deletions + insertions; }
  ErrorCounts& operator+=(const ErrorCounts& o);
};

struct ErrorRates {
  double mer = 0.0;  // percent, over all reference tokens
  double cer = 0.0;  // percent, over CN-role reference tokens
  double wer = 0.0;  // percent, over EN-role reference tokens
  ErrorCounts counts;
};

/// Substitutions and deletions are charged to the reference token's
/// language, insertions to the hypothesis token's language. Denominators
/// are floored at 1, and `counts.empty_reference` flags an empty reference
/// scored against a non-empty hypothesis.
ErrorCounts count_errors(std::span<const int> ref, std::span<const Lang> ref_langs,
                         std::span<const int> hyp, std::span<const Lang> hyp_langs);

ErrorRates rates_from_counts(const ErrorCounts& counts);

ErrorRates error_rates(std::span<const int> ref, std::span<const Lang> ref_langs,
                       std::span<const int> hyp, std::span<const Lang> hyp_langs);

struct UtteranceScore {
  std::string id;
  ErrorCounts counts;
};

/// Plain-text scoring report: one `key value` line per field, followed by
/// one line per utterance when `verbose` is set.
std::string format_report(const std::string& set_name, const std::vector<UtteranceScore>& utts,
                          bool verbose);

}  // namespace camel

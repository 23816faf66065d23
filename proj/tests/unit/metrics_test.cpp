#include <gtest/gtest.h>

#include <map>
#include <random>

#include "camel/metrics/metrics.hpp"

namespace camel {
namespace {

// Memoised recursion over suffixes; shares nothing with the table-based
// implementation.
std::size_t oracle_distance(const std::vector<int>& a, const std::vector<int>& b, std::size_t i,
                            std::size_t j, std::map<std::pair<std::size_t, std::size_t>, std::size_t>& memo) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  const auto key = std::make_pair(i, j);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  std::size_t best = oracle_distance(a, b, i + 1, j + 1, memo) + (a[i] == b[j] ? 0 : 1);
  best = std::min(best, oracle_distance(a, b, i + 1, j, memo) + 1);
  best = std::min(best, oracle_distance(a, b, i, j + 1, memo) + 1);
  return memo[key] = best;
}

std::size_t oracle_distance(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  return oracle_distance(a, b, 0, 0, memo);
}

// Tokens below 10 are CN-role, the rest EN-role.
std::vector<Lang> langs_of(const std::vector<int>& t) {
  std::vector<Lang> l;
  for (int x : t) l.push_back(x < 10 ? Lang::kCn : Lang::kEn);
  return l;
}

std::vector<int> random_seq(std::mt19937_64& rng, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<int> tok(5, 14);
  std::vector<int> s(len(rng));
  for (auto& x : s) x = tok(rng);
  return s;
}

TEST(EditDistance, IdentityAndDeletions) {
  const std::vector<int> r = {5, 6, 7, 8};
  EXPECT_EQ(edit_distance(r, r), 0u);
  const std::vector<int> h = {5, 8};
  EXPECT_EQ(edit_distance(r, h), 2u);
  std::size_t dels = 0;
  for (const auto& op : align(r, h)) dels += op.kind == EditKind::kDelete;
  EXPECT_EQ(dels, 2u);
}

TEST(EditDistance, MatchesRecursiveOracle) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 500; ++trial) {
    const auto r = random_seq(rng, 9), h = random_seq(rng, 9);
    EXPECT_EQ(edit_distance(r, h), oracle_distance(r, h));
  }
}

TEST(Align, OperationsReplayToHypothesis) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const auto r = random_seq(rng, 7), h = random_seq(rng, 7);
    std::vector<int> rebuilt;
    std::size_t cost = 0, next_ref = 0;
    for (const auto& op : align(r, h)) {
      if (op.ref_index >= 0) EXPECT_EQ(static_cast<std::size_t>(op.ref_index), next_ref++);
      switch (op.kind) {
        case EditKind::kMatch:
          EXPECT_EQ(r[op.ref_index], h[op.hyp_index]);
          rebuilt.push_back(r[op.ref_index]);
          break;
        case EditKind::kSubstitute:
        case EditKind::kInsert:
          rebuilt.push_back(h[op.hyp_index]);
          ++cost;
          break;
        case EditKind::kDelete:
          ++cost;
          break;
      }
    }
    EXPECT_EQ(rebuilt, h);
    EXPECT_EQ(next_ref, r.size());
    EXPECT_EQ(cost, oracle_distance(r, h));
  }
}

TEST(ErrorRates, WorkedMixedExample) {
  // Reference 中 文 hello, hypothesis 中 hello: one CN-role deletion.
  const std::vector<int> ref = {5, 6, 7}, hyp = {5, 7};
  const std::vector<Lang> rl = {Lang::kCn, Lang::kCn, Lang::kEn}, hl = {Lang::kCn, Lang::kEn};
  const ErrorRates r = error_rates(ref, rl, hyp, hl);
  EXPECT_NEAR(r.mer, 100.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.cer, 50.0, 1e-12);
  EXPECT_EQ(r.wer, 0.0);
  EXPECT_EQ(r.counts.deletions, 1u);
}

TEST(ErrorRates, EachErrorLandsInExactlyOneLanguage) {
  std::mt19937_64 rng(43);
  ErrorCounts total;
  for (int trial = 0; trial < 300; ++trial) {
    const auto r = random_seq(rng, 8), h = random_seq(rng, 8);
    const ErrorCounts c = count_errors(r, langs_of(r), h, langs_of(h));
    EXPECT_EQ(c.errors(), oracle_distance(r, h));
    EXPECT_EQ(c.cn_errors + c.en_errors, c.errors());
    EXPECT_EQ(c.cn_ref_tokens + c.en_ref_tokens, r.size());
    EXPECT_EQ(c.empty_reference, r.empty() && !h.empty());
    total += c;
  }
  const ErrorRates rates = rates_from_counts(total);
  EXPECT_NEAR(rates.mer, 100.0 * total.errors() / total.ref_tokens, 1e-12);
  EXPECT_NEAR(rates.cer, 100.0 * total.cn_errors / total.cn_ref_tokens, 1e-12);
}

TEST(ErrorRates, InsertionsChargeTheHypothesisLanguage) {
  const std::vector<int> ref = {5}, hyp = {5, 12};
  const ErrorCounts c = count_errors(ref, langs_of(ref), hyp, langs_of(hyp));
  EXPECT_EQ(c.insertions, 1u);
  EXPECT_EQ(c.en_errors, 1u);
  EXPECT_EQ(c.cn_errors, 0u);
}

TEST(Report, EmptyReferenceWarnsAndStaysFinite) {
  const std::vector<int> empty, hyp = {5};
  const ErrorCounts c = count_errors(empty, langs_of(empty), hyp, langs_of(hyp));
  EXPECT_TRUE(c.empty_reference);
  const std::string rep = format_report("test", {{"u1", c}}, true);
  EXPECT_NE(rep.find("warning empty_reference"), std::string::npos) << rep;
  EXPECT_NE(rep.find("utt u1"), std::string::npos) << rep;
  EXPECT_EQ(rep.find("nan"), std::string::npos) << rep;
  EXPECT_EQ(rep.find("inf"), std::string::npos) << rep;
  EXPECT_EQ(format_report("test", {{"u1", c}}, false).find("utt u1"), std::string::npos);
}

}  // namespace
}  // namespace camel

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "camel/errors.hpp"
#include "camel/metrics/metrics.hpp"

namespace camel {

namespace {

std::vector<std::size_t> distance_table(std::span<const int> ref, std::span<const int> hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::size_t> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }
  return d;
}

}  // namespace

std::vector<AlignmentOp> align(std::span<const int> ref, std::span<const int> hyp) {
  const std::size_t m = hyp.size();
  const auto d = distance_table(ref, hyp);
  auto at = [&](std::size_t i, std::size_t j) { return d[i * (m + 1) + j]; };

  std::vector<AlignmentOp> ops;
  std::size_t i = ref.size(), j = hyp.size();
  while (i > 0 || j > 0) {
    const std::size_t cur = at(i, j);
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && cur == at(i - 1, j - 1)) {
      ops.push_back({EditKind::kMatch, static_cast<int>(i - 1), static_cast<int>(j - 1)});
      --i, --j;
    } else if (i > 0 && j > 0 && ref[i - 1] != hyp[j - 1] && cur == at(i - 1, j - 1) + 1) {
      ops.push_back({EditKind::kSubstitute, static_cast<int>(i - 1), static_cast<int>(j - 1)});
      --i, --j;
    } else if (i > 0 && cur == at(i - 1, j) + 1) {
      ops.push_back({EditKind::kDelete, static_cast<int>(i - 1), -1});
      --i;
    } else {
      ops.push_back({EditKind::kInsert, -1, static_cast<int>(j - 1)});
      --j;
    }
  }
  std::reverse(ops.begin(), ops.end());
  return ops;
}

std::size_t edit_distance(std::span<const int> ref, std::span<const int> hyp) {
  return distance_table(ref, hyp).back();
}

ErrorCounts& ErrorCounts::operator+=(const ErrorCounts& o) {
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  ref_tokens += o.ref_tokens;
  cn_errors += o.cn_errors;
  cn_ref_tokens += o.cn_ref_tokens;
  en_errors += o.en_errors;
  en_ref_tokens += o.en_ref_tokens;
  empty_reference = empty_reference || o.empty_reference;
  return *this;
}

ErrorCounts count_errors(std::span<const int> ref, std::span<const Lang> ref_langs,
                         std::span<const int> hyp, std::span<const Lang> hyp_langs) {
  if (ref.size() != ref_langs.size() || hyp.size() != hyp_langs.size()) {
    throw DimensionError("token and language sequences differ in length");
  }
  ErrorCounts c;
  c.ref_tokens = ref.size();
  for (Lang l : ref_langs) ++(l == Lang::kCn ? c.cn_ref_tokens : c.en_ref_tokens);
  c.empty_reference = ref.empty() && !hyp.empty();
  auto charge = [&](Lang l) { ++(l == Lang::kCn ? c.cn_errors : c.en_errors); };
  for (const auto& op : align(ref, hyp)) {
    switch (op.kind) {
      case EditKind::kMatch:
        break;
      case EditKind::kSubstitute:
        ++c.substitutions;
        charge(ref_langs[op.ref_index]);
        break;
      case EditKind::kDelete:
        ++c.deletions;
        charge(ref_langs[op.ref_index]);
        break;
      case EditKind::kInsert:
        ++c.insertions;
        charge(hyp_langs[op.hyp_index]);
        break;
    }
  }
  return c;
}

ErrorRates rates_from_counts(const ErrorCounts& counts) {
  auto pct = [](std::size_t num, std::size_t den) {
    return 100.0 * static_cast<double>(num) / static_cast<double>(std::max<std::size_t>(1, den));
  };
  return {pct(counts.errors(), counts.ref_tokens), pct(counts.cn_errors, counts.cn_ref_tokens),
          pct(counts.en_errors, counts.en_ref_tokens), counts};
}

ErrorRates error_rates(std::span<const int> ref, std::span<const Lang> ref_langs,
                       std::span<const int> hyp, std::span<const Lang> hyp_langs) {
  return rates_from_counts(count_errors(ref, ref_langs, hyp, hyp_langs));
}

std::string format_report(const std::string& set_name, const std::vector<UtteranceScore>& utts,
                          bool verbose) {
  ErrorCounts total;
  for (const auto& u : utts) total += u.counts;
  const ErrorRates r = rates_from_counts(total);
  char buf[64];
  auto pct = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "set " << set_name << '\n'
     << "utterances " << utts.size() << '\n'
     << "mer " << pct(r.mer) << '\n'
     << "cer " << pct(r.cer) << '\n'
     << "wer " << pct(r.wer) << '\n'
     << "ref_tokens " << total.ref_tokens << '\n'
     << "cn_ref_tokens " << total.cn_ref_tokens << '\n'
     << "en_ref_tokens " << total.en_ref_tokens << '\n'
     << "substitutions " << total.substitutions << '\n'
     << "deletions " << total.deletions << '\n'
     << "insertions " << total.insertions << '\n'
     << "cn_errors " << total.cn_errors << '\n'
     << "en_errors " << total.en_errors << '\n';
  if (total.empty_reference) os << "warning empty_reference\n";
  if (verbose) {
    for (const auto& u : utts) {
      const ErrorRates ur = rates_from_counts(u.counts);
      os << "utt " << u.id << " mer " << pct(ur.mer) << " S " << u.counts.substitutions
         << " D " << u.counts.deletions << " I " << u.counts.insertions << " N "
         << u.counts.ref_tokens << (u.counts.empty_reference ? " empty_reference" : "") << '\n';
    }
  }
  return os.str();
}

}  // namespace camel

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "camel/ctc/ctc.hpp"
#include "camel/errors.hpp"

namespace camel {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct PrefixMass {
  double blank = kNegInf;      // ends in blank
  double non_blank = kNegInf;  // ends in the last label
  double total() const { return log_add(blank, non_blank); }
};

using Beam = std::map<std::vector<int>, PrefixMass>;

std::vector<std::pair<std::vector<int>, PrefixMass>> ranked(const Beam& beam) {
  std::vector<std::pair<std::vector<int>, PrefixMass>> out(beam.begin(), beam.end());
  // Stable over the map's lexicographic order, so ties rank deterministically.
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second.total() > b.second.total();
  });
  return out;
}

}  // namespace

std::vector<Hypothesis> ctc_prefix_beam_search(const Tensor& logprobs, std::size_t beam) {
  if (beam < 1) throw ConfigError("ctc_prefix_beam_search: beam must be at least 1");
  if (logprobs.rank() != 2) {
    throw DimensionError("ctc_prefix_beam_search: expected [T,V] log-probabilities, got " +
                         shape_string(logprobs.shape()));
  }
  const std::size_t T = logprobs.rows(), V = logprobs.cols();
  const auto lp = logprobs.data();

  Beam current;
  current[{}].blank = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    Beam next;
    for (const auto& [prefix, mass] : current) {
      const double total = mass.total();
      for (std::size_t c = 0; c < V; ++c) {
        const double p = lp[t * V + c];
        if (p == kNegInf) continue;
        if (static_cast<int>(c) == kCtcBlank) {
          auto& m = next[prefix];
          m.blank = log_add(m.blank, total + p);
          continue;
        }
        std::vector<int> extended = prefix;
        extended.push_back(static_cast<int>(c));
        if (!prefix.empty() && prefix.back() == static_cast<int>(c)) {
          // A repeat only extends across a blank; otherwise it merges.
          if (mass.blank != kNegInf) {
            auto& ext = next[extended];
            ext.non_blank = log_add(ext.non_blank, mass.blank + p);
          }
          if (mass.non_blank != kNegInf) {
            auto& same = next[prefix];
            same.non_blank = log_add(same.non_blank, mass.non_blank + p);
          }
        } else {
          auto& ext = next[extended];
          ext.non_blank = log_add(ext.non_blank, total + p);
        }
      }
    }
    auto order = ranked(next);
    if (order.size() > beam) order.resize(beam);
    current.clear();
    for (auto& [prefix, mass] : order) current.emplace(std::move(prefix), mass);
  }

  std::vector<Hypothesis> out;
  for (auto& [prefix, mass] : ranked(current)) {
    Hypothesis h;
    h.tokens = prefix;
    h.ctc_score = std::min(0.0, mass.total());
    out.push_back(std::move(h));
  }
  return out;
}

}  // namespace camel

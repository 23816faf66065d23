#include "camel/training/loss.hpp"

#include <cmath>
#include <vector>

#include "camel/errors.hpp"
#include "camel/numerics/ops.hpp"

namespace camel {

std::array<double, 5> loss_coefficients(const LossWeights& w, bool language_ctc, bool ld) {
  const double alpha = language_ctc ? w.alpha : 0.0;
  return {w.lambda * (1.0 - alpha),
          language_ctc ? w.lambda * alpha / 2.0 : 0.0,
          language_ctc ? w.lambda * alpha / 2.0 : 0.0,
          1.0 - w.lambda,
          ld ? w.beta : 0.0};
}

Tensor total_loss(const LossTerms& terms, const LossWeights& w) {
  if (!terms.ctc.defined() || !terms.ce.defined()) {
    throw ConfigError("total_loss: CTC and CE terms are mandatory");
  }
  if (terms.en_ctc.defined() != terms.cn_ctc.defined()) {
    throw ConfigError("total_loss: language-wise CTC needs both EN and CN terms");
  }
  const bool lang = terms.en_ctc.defined();
  const bool ld = terms.ld_ce.defined();
  const auto coef = loss_coefficients(w, lang, ld);
  const std::array<std::pair<const char*, const Tensor*>, 5> named = {{{"ctc", &terms.ctc},
                                                                       {"en_ctc", &terms.en_ctc},
                                                                       {"cn_ctc", &terms.cn_ctc},
                                                                       {"ce", &terms.ce},
                                                                       {"ld_ce", &terms.ld_ce}}};
  std::vector<Tensor> parts;
  std::vector<double> weights;
  for (std::size_t i = 0; i < named.size(); ++i) {
    const Tensor& t = *named[i].second;
    if (!t.defined()) continue;
    if (!std::isfinite(t.item())) {
      throw NonFiniteError(std::string("loss component ") + named[i].first + " is not finite (" +
                           std::to_string(t.item()) + ")");
    }
    parts.push_back(t);
    weights.push_back(coef[i]);
  }
  return add_scalars(parts, weights);
}

double total_loss(double ctc, double en_ctc, double cn_ctc, double ce, double ld_ce,
                  const LossWeights& w) {
  const LossTerms terms{Tensor::scalar(ctc), Tensor::scalar(en_ctc), Tensor::scalar(cn_ctc),
                        Tensor::scalar(ce), Tensor::scalar(ld_ce)};
  return total_loss(terms, w).item();
}

}  // namespace camel

#include <algorithm>
#include <cmath>
#include <limits>

#include "camel/ctc/ctc.hpp"
#include "camel/errors.hpp"

namespace camel {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

std::size_t ctc_min_frames(std::span<const int> labels) {
  std::size_t n = labels.size();
  for (std::size_t i = 1; i < labels.size(); ++i)
    if (labels[i] == labels[i - 1]) ++n;
  return n;
}

std::vector<int> ctc_collapse(std::span<const int> frame_labels) {
  std::vector<int> out;
  int prev = -1;
  for (int l : frame_labels) {
    if (l != prev && l != kCtcBlank) out.push_back(l);
    prev = l;
  }
  return out;
}

Tensor ctc_loss(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2) {
    throw DimensionError("ctc_loss: expected [T,V] logits, got " + shape_string(logits.shape()));
  }
  const std::size_t T = logits.rows(), V = logits.cols();
  for (int l : labels) {
    if (l == kCtcBlank || l < 0 || static_cast<std::size_t>(l) >= V) {
      throw InvalidTokenError("ctc_loss: label " + std::to_string(l) +
                              " is blank or outside the " + std::to_string(V) + "-symbol alphabet");
    }
  }
  const std::size_t required = ctc_min_frames(labels);
  if (T < required) {
    throw InfeasibleTargetError("ctc_loss: target of " + std::to_string(labels.size()) +
                                " labels needs at least " + std::to_string(required) +
                                " frames, got " + std::to_string(T));
  }

  // Row-wise log-softmax.
  const auto X = logits.data();
  std::vector<double> logp(T * V);
  for (std::size_t t = 0; t < T; ++t) {
    const double* row = &X[t * V];
    const double mx = *std::max_element(row, row + V);
    double z = 0.0;
    for (std::size_t k = 0; k < V; ++k) z += std::exp(row[k] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t k = 0; k < V; ++k) logp[t * V + k] = row[k] - lse;
  }

  const std::size_t S = 2 * labels.size() + 1;
  std::vector<int> ext(S, kCtcBlank);
  for (std::size_t i = 0; i < labels.size(); ++i) ext[2 * i + 1] = labels[i];
  auto skip_allowed = [&](std::size_t s) { return s >= 2 && ext[s] != kCtcBlank && ext[s] != ext[s - 2]; };
  auto lp = [&](std::size_t t, std::size_t s) { return logp[t * V + static_cast<std::size_t>(ext[s])]; };

  std::vector<double> alpha(T * S, kNegInf), beta(T * S, kNegInf);
  alpha[0] = lp(0, 0);
  if (S > 1) alpha[1] = lp(0, 1);
  for (std::size_t t = 1; t < T; ++t)
    for (std::size_t s = 0; s < S; ++s) {
      double a = alpha[(t - 1) * S + s];
      if (s >= 1) a = log_add(a, alpha[(t - 1) * S + s - 1]);
      if (skip_allowed(s)) a = log_add(a, alpha[(t - 1) * S + s - 2]);
      if (a != kNegInf) alpha[t * S + s] = a + lp(t, s);
    }
  beta[(T - 1) * S + S - 1] = lp(T - 1, S - 1);
  if (S > 1) beta[(T - 1) * S + S - 2] = lp(T - 1, S - 2);
  for (std::size_t t = T - 1; t-- > 0;)
    for (std::size_t s = 0; s < S; ++s) {
      double b = beta[(t + 1) * S + s];
      if (s + 1 < S) b = log_add(b, beta[(t + 1) * S + s + 1]);
      if (s + 2 < S && skip_allowed(s + 2)) b = log_add(b, beta[(t + 1) * S + s + 2]);
      if (b != kNegInf) beta[t * S + s] = b + lp(t, s);
    }

  double log_likelihood = alpha[(T - 1) * S + S - 1];
  if (S > 1) log_likelihood = log_add(log_likelihood, alpha[(T - 1) * S + S - 2]);
  if (!std::isfinite(log_likelihood)) {
    throw NonFiniteError("ctc_loss: log-likelihood is not finite (" +
                         std::to_string(log_likelihood) + ")");
  }

  // d(-log P)/d logits[t,k] = softmax[t,k] - sum_{s: ext[s]=k} posterior(t,s).
  std::vector<double> grad(T * V);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < V; ++k) grad[t * V + k] = std::exp(logp[t * V + k]);
    for (std::size_t s = 0; s < S; ++s) {
      const double a = alpha[t * S + s], b = beta[t * S + s];
      if (a == kNegInf || b == kNegInf) continue;
      grad[t * V + static_cast<std::size_t>(ext[s])] -= std::exp(a + b - lp(t, s) - log_likelihood);
    }
  }

  return Tensor::make_result({1}, {-log_likelihood}, {logits},
                             [grad = std::move(grad)](Node& self) {
                               Node& p = *self.parents[0];
                               if (!p.requires_grad) return;
                               auto g = p.grad_buffer();
                               const double up = self.grad[0];
                               for (std::size_t i = 0; i < g.size(); ++i) g[i] += up * grad[i];
                             });
}

}  // namespace camel

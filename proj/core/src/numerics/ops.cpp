#include "camel/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "camel/errors.hpp"

namespace camel {

namespace {

void require_rank2(const Tensor& x, const char* op) {
  if (!x.defined() || x.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a rank-2 tensor, got " +
                         (x.defined() ? shape_string(x.shape()) : "undefined"));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
}

thread_local ReluPatternScope* active_relu_scope = nullptr;

// Grad accumulator of a parent, or empty when it needs none.
std::span<double> grad_of(Node& self, std::size_t parent) {
  Node& p = *self.parents[parent];
  if (!p.requires_grad) return {};
  return p.grad_buffer();
}

}  // namespace

Mask::Mask(std::size_t rows, std::size_t cols, bool fill)
    : rows_(rows), cols_(cols), bits_(rows * cols, fill ? 1 : 0) {}

Mask Mask::causal(std::size_t n) {
  Mask m(n, n, false);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c <= r; ++c) m.set(r, c, true);
  return m;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions disagree " + shape_string(a.shape()) +
                         " x " + shape_string(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  const auto A = a.data();
  const auto B = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    double* o = &out[i * n];
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      const double* brow = &B[p * n];
      for (std::size_t j = 0; j < n; ++j) o[j] += av * brow[j];
    }
  }
  return Tensor::make_result({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    const auto& G = self.grad;
    const auto& A = self.parents[0]->value;
    const auto& B = self.parents[1]->value;
    if (auto ga = grad_of(self, 0); !ga.empty()) {
      // dA = G B^T
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += G[i * n + j] * B[p * n + j];
          ga[i * k + p] += s;
        }
    }
    if (auto gb = grad_of(self, 1); !gb.empty()) {
      // dB = A^T G
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double av = A[i * k + p];
          for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += av * G[i * n + j];
        }
    }
  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul_nt");
  require_rank2(b, "matmul_nt");
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k) {
    throw DimensionError("matmul_nt: inner dimensions disagree " + shape_string(a.shape()) +
                         " x " + shape_string(b.shape()) + "^T");
  }
  std::vector<double> out(m * n, 0.0);
  const auto A = a.data();
  const auto B = b.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += A[i * k + p] * B[j * k + p];
      out[i * n + j] = s;
    }
  return Tensor::make_result({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    const auto& G = self.grad;
    const auto& A = self.parents[0]->value;
    const auto& B = self.parents[1]->value;
    if (auto ga = grad_of(self, 0); !ga.empty()) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double g = G[i * n + j];
          for (std::size_t p = 0; p < k; ++p) ga[i * k + p] += g * B[j * k + p];
        }
    }
    if (auto gb = grad_of(self, 1); !gb.empty()) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double g = G[i * n + j];
          for (std::size_t p = 0; p < k; ++p) gb[j * k + p] += g * A[i * k + p];
        }
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.numel());
  const auto A = a.data();
  const auto B = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = A[i] + B[i];
  return Tensor::make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p)
      if (auto g = grad_of(self, p); !g.empty())
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.numel());
  const auto A = a.data();
  const auto B = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = A[i] - B[i];
  return Tensor::make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    if (auto g = grad_of(self, 0); !g.empty())
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    if (auto g = grad_of(self, 1); !g.empty())
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
  });
}

Tensor add_row(const Tensor& x, const Tensor& bias) {
  require_rank2(x, "add_row");
  const std::size_t m = x.rows(), n = x.cols();
  if (bias.numel() != n) {
    throw DimensionError("add_row: bias " + shape_string(bias.shape()) +
                         " does not broadcast over " + shape_string(x.shape()));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  const auto b = bias.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += b[j];
  return Tensor::make_result(x.shape(), std::move(out), {x, bias}, [m, n](Node& self) {
    if (auto g = grad_of(self, 0); !g.empty())
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    if (auto g = grad_of(self, 1); !g.empty())
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[j] += self.grad[i * n + j];
  });
}

Tensor scale(const Tensor& x, double factor) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (auto& v : out) v *= factor;
  return Tensor::make_result(x.shape(), std::move(out), {x}, [factor](Node& self) {
    if (auto g = grad_of(self, 0); !g.empty())
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * self.grad[i];
  });
}

ReluPatternScope::ReluPatternScope() : outer_(active_relu_scope) { active_relu_scope = this; }

ReluPatternScope::~ReluPatternScope() { active_relu_scope = outer_; }

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.data().begin(), x.data().end());
  if (ReluPatternScope* s = active_relu_scope) {
    // FNV-1a over one byte per element.
    for (double v : out) s->hash_ = (s->hash_ ^ (v > 0.0 ? 1u : 0u)) * 1099511628211ull;
  }
  for (auto& v : out) v = v > 0.0 ? v : 0.0;
  return Tensor::make_result(x.shape(), std::move(out), {x}, [](Node& self) {
    if (auto g = grad_of(self, 0); !g.empty()) {
      const auto& in = self.parents[0]->value;
      for (std::size_t i = 0; i < g.size(); ++i)
        if (in[i] > 0.0) g[i] += self.grad[i];
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_rank2(x, "linear");
  require_rank2(weight, "linear");
  if (x.cols() != weight.rows()) {
    throw DimensionError("linear: input " + shape_string(x.shape()) +
                         " incompatible with weight " + shape_string(weight.shape()));
  }
  Tensor y = matmul(x, weight);
  return bias.defined() ? add_row(y, bias) : y;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps) {
  require_rank2(x, "layer_norm");
  const std::size_t m = x.rows(), d = x.cols();
  if (gamma.numel() != d || beta.numel() != d) {
    throw DimensionError("layer_norm: affine parameters " + shape_string(gamma.shape()) +
                         "/" + shape_string(beta.shape()) + " do not match " +
                         shape_string(x.shape()));
  }
  if (!(eps > 0.0)) throw ConfigError("layer_norm: eps must be positive");
  std::vector<double> out(m * d);
  std::vector<double> xhat(m * d);
  std::vector<double> inv_std(m);
  const auto X = x.data();
  const auto G = gamma.data();
  const auto B = beta.data();
  for (std::size_t i = 0; i < m; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += X[i * d + j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double c = X[i * d + j] - mean;
      var += c * c;
    }
    var /= static_cast<double>(d);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      xhat[i * d + j] = (X[i * d + j] - mean) * inv_std[i];
      out[i * d + j] = G[j] * xhat[i * d + j] + B[j];
    }
  }
  return Tensor::make_result(
      x.shape(), std::move(out), {x, gamma, beta},
      [m, d, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
        const auto& dy = self.grad;
        const auto& G = self.parents[1]->value;
        if (auto gx = grad_of(self, 0); !gx.empty()) {
          for (std::size_t i = 0; i < m; ++i) {
            double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
              const double dxh = dy[i * d + j] * G[j];
              mean_dxhat += dxh;
              mean_dxhat_xhat += dxh * xhat[i * d + j];
            }
            mean_dxhat /= static_cast<double>(d);
            mean_dxhat_xhat /= static_cast<double>(d);
            for (std::size_t j = 0; j < d; ++j) {
              const double dxh = dy[i * d + j] * G[j];
              gx[i * d + j] +=
                  inv_std[i] * (dxh - mean_dxhat - xhat[i * d + j] * mean_dxhat_xhat);
            }
          }
        }
        if (auto gg = grad_of(self, 1); !gg.empty())
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < d; ++j) gg[j] += dy[i * d + j] * xhat[i * d + j];
        if (auto gb = grad_of(self, 2); !gb.empty())
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < d; ++j) gb[j] += dy[i * d + j];
      });
}

Tensor softmax_rows(const Tensor& x, const Mask* mask) {
  require_rank2(x, "softmax_rows");
  const std::size_t m = x.rows(), n = x.cols();
  if (mask && (mask->rows() != m || mask->cols() != n)) {
    throw DimensionError("softmax_rows: mask " + std::to_string(mask->rows()) + "x" +
                         std::to_string(mask->cols()) + " does not match " +
                         shape_string(x.shape()));
  }
  const auto X = x.data();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask && !mask->allowed(i, j)) continue;
      any = true;
      mx = std::max(mx, X[i * n + j]);
    }
    if (!any) {
      throw DegenerateMaskError("softmax_rows: query row " + std::to_string(i) +
                                " has every key masked");
    }
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask && !mask->allowed(i, j)) continue;
      out[i * n + j] = std::exp(X[i * n + j] - mx);
      z += out[i * n + j];
    }
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] /= z;
  }
  return Tensor::make_result(x.shape(), std::move(out), {x}, [m, n](Node& self) {
    if (auto g = grad_of(self, 0); !g.empty()) {
      const auto& y = self.value;
      const auto& dy = self.grad;
      for (std::size_t i = 0; i < m; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < n; ++j) dot += dy[i * n + j] * y[i * n + j];
        for (std::size_t j = 0; j < n; ++j)
          g[i * n + j] += y[i * n + j] * (dy[i * n + j] - dot);
      }
    }
  });
}

Tensor log_softmax_rows(const Tensor& x) {
  require_rank2(x, "log_softmax_rows");
  const std::size_t m = x.rows(), n = x.cols();
  const auto X = x.data();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    double mx = X[i * n];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, X[i * n + j]);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += std::exp(X[i * n + j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = X[i * n + j] - lse;
  }
  return Tensor::make_result(x.shape(), std::move(out), {x}, [m, n](Node& self) {
    if (auto g = grad_of(self, 0); !g.empty()) {
      const auto& y = self.value;
      const auto& dy = self.grad;
      for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += dy[i * n + j];
        for (std::size_t j = 0; j < n; ++j)
          g[i * n + j] += dy[i * n + j] - std::exp(y[i * n + j]) * s;
      }
    }
  });
}

Tensor mul_col(const Tensor& x, const Tensor& w) {
  require_rank2(x, "mul_col");
  const std::size_t m = x.rows(), n = x.cols();
  if (w.numel() != m) {
    throw DimensionError("mul_col: weight column " + shape_string(w.shape()) +
                         " does not match " + shape_string(x.shape()));
  }
  std::vector<double> out(m * n);
  const auto X = x.data();
  const auto W = w.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = W[i] * X[i * n + j];
  return Tensor::make_result(x.shape(), std::move(out), {x, w}, [m, n](Node& self) {
    const auto& X = self.parents[0]->value;
    const auto& W = self.parents[1]->value;
    const auto& G = self.grad;
    if (auto gx = grad_of(self, 0); !gx.empty())
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += W[i] * G[i * n + j];
    if (auto gw = grad_of(self, 1); !gw.empty())
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gw[i] += X[i * n + j] * G[i * n + j];
  });
}

Tensor convex_mix(const Tensor& w, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "convex_mix");
  require_rank2(a, "convex_mix");
  const std::size_t m = a.rows(), n = a.cols();
  if (w.numel() != m) {
    throw DimensionError("convex_mix: weight column " + shape_string(w.shape()) +
                         " does not match " + shape_string(a.shape()));
  }
  std::vector<double> out(m * n);
  const auto W = w.data();
  const auto A = a.data();
  const auto B = b.data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out[i * n + j] = B[i * n + j] + W[i] * (A[i * n + j] - B[i * n + j]);
  return Tensor::make_result(a.shape(), std::move(out), {w, a, b}, [m, n](Node& self) {
    const auto& W = self.parents[0]->value;
    const auto& A = self.parents[1]->value;
    const auto& B = self.parents[2]->value;
    const auto& G = self.grad;
    if (auto gw = grad_of(self, 0); !gw.empty())
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
          gw[i] += G[i * n + j] * (A[i * n + j] - B[i * n + j]);
    if (auto ga = grad_of(self, 1); !ga.empty())
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += W[i] * G[i * n + j];
    if (auto gb = grad_of(self, 2); !gb.empty())
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gb[i * n + j] += (1.0 - W[i]) * G[i * n + j];
  });
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end) {
  require_rank2(x, "slice_cols");
  const std::size_t m = x.rows(), n = x.cols();
  if (begin >= end || end > n) {
    throw DimensionError("slice_cols: range [" + std::to_string(begin) + "," +
                         std::to_string(end) + ") outside " + shape_string(x.shape()));
  }
  const std::size_t w = end - begin;
  std::vector<double> out(m * w);
  const auto X = x.data();
  for (std::size_t i = 0; i < m; ++i)
    std::copy_n(&X[i * n + begin], w, &out[i * w]);
  return Tensor::make_result({m, w}, std::move(out), {x}, [m, n, w, begin](Node& self) {
    if (auto g = grad_of(self, 0); !g.empty())
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < w; ++j) g[i * n + begin + j] += self.grad[i * w + j];
  });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t m = parts.front().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_rank2(p, "concat_cols");
    if (p.rows() != m) {
      throw DimensionError("concat_cols: row count mismatch " +
                           shape_string(parts.front().shape()) + " vs " +
                           shape_string(p.shape()));
    }
    widths.push_back(p.cols());
    total += p.cols();
  }
  std::vector<double> out(m * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto P = parts[k].data();
    for (std::size_t i = 0; i < m; ++i)
      std::copy_n(&P[i * widths[k]], widths[k], &out[i * total + offset]);
    offset += widths[k];
  }
  std::vector<Tensor> parents(parts.begin(), parts.end());
  return Tensor::make_result({m, total}, std::move(out), std::move(parents),
                             [m, total, widths](Node& self) {
                               std::size_t offset = 0;
                               for (std::size_t k = 0; k < widths.size(); ++k) {
                                 if (auto g = grad_of(self, k); !g.empty())
                                   for (std::size_t i = 0; i < m; ++i)
                                     for (std::size_t j = 0; j < widths[k]; ++j)
                                       g[i * widths[k] + j] += self.grad[i * total + offset + j];
                                 offset += widths[k];
                               }
                             });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: " + shape_string(x.shape()) + " -> " + shape_string(shape));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  return Tensor::make_result(std::move(shape), std::move(out), {x}, [](Node& self) {
    if (auto g = grad_of(self, 0); !g.empty())
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor embedding(const Tensor& table, std::span<const int> ids) {
  require_rank2(table, "embedding");
  const std::size_t v = table.rows(), d = table.cols();
  if (ids.empty()) throw DimensionError("embedding: empty id list");
  std::vector<double> out(ids.size() * d);
  const auto T = table.data();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= v) {
      throw InvalidTokenError("embedding: id " + std::to_string(ids[i]) +
                              " outside table of " + std::to_string(v) + " rows");
    }
    std::copy_n(&T[static_cast<std::size_t>(ids[i]) * d], d, &out[i * d]);
  }
  std::vector<int> rows(ids.begin(), ids.end());
  return Tensor::make_result({ids.size(), d}, std::move(out), {table},
                             [d, rows = std::move(rows)](Node& self) {
                               if (auto g = grad_of(self, 0); !g.empty())
                                 for (std::size_t i = 0; i < rows.size(); ++i)
                                   for (std::size_t j = 0; j < d; ++j)
                                     g[static_cast<std::size_t>(rows[i]) * d + j] +=
                                         self.grad[i * d + j];
                             });
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  return Tensor::make_result({1}, {s}, {x}, [](Node& self) {
    if (auto g = grad_of(self, 0); !g.empty())
      for (auto& v : g) v += self.grad[0];
  });
}

Tensor add_scalars(std::span<const Tensor> terms, std::span<const double> weights) {
  if (terms.size() != weights.size()) {
    throw DimensionError("add_scalars: " + std::to_string(terms.size()) + " terms but " +
                         std::to_string(weights.size()) + " weights");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) s += weights[i] * terms[i].item();
  std::vector<double> w(weights.begin(), weights.end());
  std::vector<Tensor> parents(terms.begin(), terms.end());
  return Tensor::make_result({1}, {s}, std::move(parents), [w = std::move(w)](Node& self) {
    for (std::size_t i = 0; i < w.size(); ++i)
      if (auto g = grad_of(self, i); !g.empty()) g[0] += w[i] * self.grad[0];
  });
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> targets) {
  require_rank2(logits, "cross_entropy");
  const std::size_t m = logits.rows(), n = logits.cols();
  if (targets.size() != m) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) +
                         " targets for " + shape_string(logits.shape()) + " logits");
  }
  const auto X = logits.data();
  std::vector<double> probs(m * n);
  double loss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= n) {
      throw InvalidTokenError("cross_entropy: target " + std::to_string(targets[i]) +
                              " outside " + std::to_string(n) + " classes");
    }
    double mx = X[i * n];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, X[i * n + j]);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      probs[i * n + j] = std::exp(X[i * n + j] - mx);
      z += probs[i * n + j];
    }
    for (std::size_t j = 0; j < n; ++j) probs[i * n + j] /= z;
    loss -= X[i * n + static_cast<std::size_t>(targets[i])] - mx - std::log(z);
  }
  std::vector<int> tgt(targets.begin(), targets.end());
  return Tensor::make_result(
      {1}, {loss}, {logits},
      [m, n, probs = std::move(probs), tgt = std::move(tgt)](Node& self) {
        if (auto g = grad_of(self, 0); !g.empty()) {
          const double up = self.grad[0];
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
              const double onehot = static_cast<int>(j) == tgt[i] ? 1.0 : 0.0;
              g[i * n + j] += up * (probs[i * n + j] - onehot);
            }
        }
      });
}

bool all_finite(const Tensor& x) {
  for (double v : x.data())
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace camel

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "camel/numerics/tensor.hpp"

namespace camel {

/// Boolean attention mask, `allowed(q, k)` true where query row q may attend
/// to key column k.
class Mask {
 public:
  Mask(std::size_t rows, std::size_t cols, bool fill = true);

  // Lower-triangular (i may see j <= i).
  static Mask causal(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool allowed(std::size_t r, std::size_t c) const { return bits_[r * cols_ + c] != 0; }
  void set(std::size_t r, std::size_t c, bool value) { bits_[r * cols_ + c] = value ? 1 : 0; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<unsigned char> bits_;
};

// Dense 2-D algebra.
Tensor matmul(const Tensor& a, const Tensor& b);     // [m,k] x [k,n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // [m,k] x [n,k]^T
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor add_row(const Tensor& x, const Tensor& bias);  // bias [n] broadcast over rows
Tensor scale(const Tensor& x, double factor);
Tensor relu(const Tensor& x);

/// While alive on this thread, every relu folds the sign pattern of its input
/// into `hash()`. Two forward passes with equal hashes took the same side of
/// every kink.
class ReluPatternScope {
 public:
  ReluPatternScope();
  ~ReluPatternScope();
  ReluPatternScope(const ReluPatternScope&) = delete;
  ReluPatternScope& operator=(const ReluPatternScope&) = delete;

  std::uint64_t hash() const { return hash_; }

 private:
  friend Tensor relu(const Tensor& x);
  std::uint64_t hash_ = 1469598103934665603ull;
  ReluPatternScope* outer_;
};

/// y = x W (+ b). `bias` may be an undefined Tensor.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias = {});

/// Per-row normalization followed by the affine gamma/beta transform.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps = 1e-5);

// Row-wise softmax. Masked entries come out exactly 0; a row with no allowed
// entry raises DegenerateMaskError.
Tensor softmax_rows(const Tensor& x, const Mask* mask = nullptr);
Tensor log_softmax_rows(const Tensor& x);

// x[r, :] * w[r, 0].
Tensor mul_col(const Tensor& x, const Tensor& w);

// b + w (a - b), with w a [T,1] column. Equal inputs return b exactly.
Tensor convex_mix(const Tensor& w, const Tensor& a, const Tensor& b);

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor reshape(const Tensor& x, Shape shape);

/// Gathers rows of `table` ([V, d]) at `ids`.
Tensor embedding(const Tensor& table, std::span<const int> ids);

Tensor sum(const Tensor& x);
Tensor add_scalars(std::span<const Tensor> terms, std::span<const double> weights);

/// Sum over rows of -log softmax(logits)[r, targets[r]].
Tensor cross_entropy(const Tensor& logits, std::span<const int> targets);

bool all_finite(const Tensor& x);

}  // namespace camel

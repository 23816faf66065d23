#pragma once

#include <random>
#include <string>

#include "camel/numerics/param_store.hpp"

namespace camel {

// Output length of one kernel-3 / stride-2 valid convolution, 0 if t < 3.
constexpr std::size_t conv_out(std::size_t t) { return t < 3 ? 0 : (t - 3) / 2 + 1; }

// Two stacked convolutions reduce T roughly 4x.
constexpr std::size_t subsampled_length(std::size_t t) { return conv_out(conv_out(t)); }

// Smallest input length the two-stage frontend accepts.
inline constexpr std::size_t kMinSubsampleInput = 7;

/// Kernel-3, stride-2 valid 2-D convolution over a channels-last [H, W, Cin]
/// tensor with weight [Cout, 3, 3, Cin] and bias [Cout].
Tensor conv2d_k3s2(const Tensor& x, const Tensor& weight, const Tensor& bias);

struct ConvFrontendParams {
  Tensor conv1_w, conv1_b, conv2_w, conv2_b, proj_w, proj_b;

  static ConvFrontendParams create(ParamStore& store, const std::string& prefix,
                                   std::size_t feature_dim, std::size_t channels,
                                   std::size_t d, std::mt19937_64& rng);
  static ConvFrontendParams bind(const ParamStore& store, const std::string& prefix);
};

/// [T, F] features -> two ReLU conv blocks -> linear projection -> [T', d]
/// with T' = conv_out(conv_out(T)). Throws InputTooShortError when either
/// axis collapses.
Tensor conv_downsample(const Tensor& features, const ConvFrontendParams& params);

}  // namespace camel

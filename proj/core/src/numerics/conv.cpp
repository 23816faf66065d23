#include "camel/numerics/conv.hpp"

#include "camel/errors.hpp"
#include "camel/numerics/ops.hpp"

namespace camel {

Tensor conv2d_k3s2(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  if (x.rank() != 3 || weight.rank() != 4) {
    throw DimensionError("conv2d: expected [H,W,C] input and [Cout,3,3,Cin] weight, got " +
                         shape_string(x.shape()) + " and " + shape_string(weight.shape()));
  }
  const std::size_t H = x.shape()[0], W = x.shape()[1], Cin = x.shape()[2];
  const std::size_t Cout = weight.shape()[0];
  if (weight.shape()[1] != 3 || weight.shape()[2] != 3 || weight.shape()[3] != Cin ||
      bias.numel() != Cout) {
    throw DimensionError("conv2d: weight " + shape_string(weight.shape()) + " / bias " +
                         shape_string(bias.shape()) + " incompatible with input " +
                         shape_string(x.shape()));
  }
  const std::size_t Ho = conv_out(H), Wo = conv_out(W);
  if (Ho == 0 || Wo == 0) {
    throw InputTooShortError("conv2d: input " + shape_string(x.shape()) +
                             " smaller than the 3x3 kernel");
  }
  const auto X = x.data();
  const auto Wt = weight.data();
  const auto B = bias.data();
  std::vector<double> out(Ho * Wo * Cout);
  for (std::size_t oh = 0; oh < Ho; ++oh)
    for (std::size_t ow = 0; ow < Wo; ++ow)
      for (std::size_t co = 0; co < Cout; ++co) {
        double s = B[co];
        for (std::size_t kh = 0; kh < 3; ++kh)
          for (std::size_t kw = 0; kw < 3; ++kw) {
            const double* xin = &X[((2 * oh + kh) * W + (2 * ow + kw)) * Cin];
            const double* w = &Wt[((co * 3 + kh) * 3 + kw) * Cin];
            for (std::size_t ci = 0; ci < Cin; ++ci) s += xin[ci] * w[ci];
          }
        out[(oh * Wo + ow) * Cout + co] = s;
      }
  return Tensor::make_result(
      {Ho, Wo, Cout}, std::move(out), {x, weight, bias},
      [W, Cin, Cout, Ho, Wo](Node& self) {
        const auto& G = self.grad;
        const auto& X = self.parents[0]->value;
        const auto& Wt = self.parents[1]->value;
        Node& px = *self.parents[0];
        Node& pw = *self.parents[1];
        Node& pb = *self.parents[2];
        std::span<double> gx = px.requires_grad ? px.grad_buffer() : std::span<double>{};
        std::span<double> gw = pw.requires_grad ? pw.grad_buffer() : std::span<double>{};
        std::span<double> gb = pb.requires_grad ? pb.grad_buffer() : std::span<double>{};
        for (std::size_t oh = 0; oh < Ho; ++oh)
          for (std::size_t ow = 0; ow < Wo; ++ow)
            for (std::size_t co = 0; co < Cout; ++co) {
              const double g = G[(oh * Wo + ow) * Cout + co];
              if (!gb.empty()) gb[co] += g;
              for (std::size_t kh = 0; kh < 3; ++kh)
                for (std::size_t kw = 0; kw < 3; ++kw) {
                  const std::size_t xoff = ((2 * oh + kh) * W + (2 * ow + kw)) * Cin;
                  const std::size_t woff = ((co * 3 + kh) * 3 + kw) * Cin;
                  if (!gw.empty())
                    for (std::size_t ci = 0; ci < Cin; ++ci) gw[woff + ci] += g * X[xoff + ci];
                  if (!gx.empty())
                    for (std::size_t ci = 0; ci < Cin; ++ci) gx[xoff + ci] += g * Wt[woff + ci];
                }
            }
      });
}

ConvFrontendParams ConvFrontendParams::create(ParamStore& store, const std::string& prefix,
                                              std::size_t feature_dim, std::size_t channels,
                                              std::size_t d, std::mt19937_64& rng) {
  const std::size_t f2 = subsampled_length(feature_dim);
  if (f2 == 0) {
    throw ConfigError("feature dim " + std::to_string(feature_dim) + " below the minimum of " +
                      std::to_string(kMinSubsampleInput) + " for the conv frontend");
  }
  ConvFrontendParams p;
  p.conv1_w = store.create(prefix + ".conv1.weight", {channels, 3, 3, 1}, Init::kUniformFanIn, rng);
  p.conv1_b = store.create(prefix + ".conv1.bias", {channels}, Init::kZeros, rng);
  p.conv2_w = store.create(prefix + ".conv2.weight", {channels, 3, 3, channels},
                           Init::kUniformFanIn, rng);
  p.conv2_b = store.create(prefix + ".conv2.bias", {channels}, Init::kZeros, rng);
  p.proj_w = store.create(prefix + ".proj.weight", {f2 * channels, d}, Init::kUniformFanIn, rng);
  p.proj_b = store.create(prefix + ".proj.bias", {d}, Init::kZeros, rng);
  return p;
}

ConvFrontendParams ConvFrontendParams::bind(const ParamStore& store, const std::string& prefix) {
  return {store.get(prefix + ".conv1.weight"), store.get(prefix + ".conv1.bias"),
          store.get(prefix + ".conv2.weight"), store.get(prefix + ".conv2.bias"),
          store.get(prefix + ".proj.weight"),  store.get(prefix + ".proj.bias")};
}

Tensor conv_downsample(const Tensor& features, const ConvFrontendParams& params) {
  if (features.rank() != 2) {
    throw DimensionError("conv_downsample: expected [T,F] features, got " +
                         shape_string(features.shape()));
  }
  const std::size_t T = features.rows(), F = features.cols();
  if (subsampled_length(T) == 0) {
    throw InputTooShortError("input of " + std::to_string(T) +
                             " frames is too short for 4x subsampling (minimum T = " +
                             std::to_string(kMinSubsampleInput) + ")");
  }
  if (subsampled_length(F) == 0) {
    throw InputTooShortError("feature dim " + std::to_string(F) +
                             " is too small for the conv frontend (minimum " +
                             std::to_string(kMinSubsampleInput) + ")");
  }
  Tensor h = reshape(features, {T, F, 1});
  h = relu(conv2d_k3s2(h, params.conv1_w, params.conv1_b));
  h = relu(conv2d_k3s2(h, params.conv2_w, params.conv2_b));
  const std::size_t t2 = h.shape()[0];
  h = reshape(h, {t2, h.shape()[1] * h.shape()[2]});
  return linear(h, params.proj_w, params.proj_b);
}

}  // namespace camel

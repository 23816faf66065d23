#include "camel/encoder/encoder.hpp"

#include <cmath>

#include "camel/errors.hpp"
#include "camel/numerics/ops.hpp"

namespace camel {

const char* fusion_mode_name(FusionMode mode) {
  switch (mode) {
    case FusionMode::kNone:
      return "none";
    case FusionMode::kLinearGate:
      return "linear_gate";
    case FusionMode::kGatedCrossAttention:
      return "gated_cross_attention";
  }
  return "?";
}

FusionMode parse_fusion_mode(const std::string& name) {
  if (name == "none") return FusionMode::kNone;
  if (name == "linear_gate") return FusionMode::kLinearGate;
  if (name == "gated_cross_attention") return FusionMode::kGatedCrossAttention;
  throw ConfigError("unknown fusion mode '" + name + "'");
}

EncoderConfig EncoderConfig::full_preset() {
  EncoderConfig c;
  c.feature_dim = 80;
  c.conv_channels = 256;
  c.d = 256;
  c.heads = 4;
  c.ffn_dim = 1024;
  c.n_backbone_layers = 6;
  c.n_moe_layers = 6;
  c.adapter_bottleneck_dim = 64;
  c.gate_share_period = 2;
  return c;
}

EncoderConfig EncoderConfig::desk_preset() {
  EncoderConfig c;
  c.feature_dim = 20;
  c.conv_channels = 32;
  c.d = 64;
  c.heads = 2;
  c.ffn_dim = 128;
  c.n_backbone_layers = 2;
  c.n_moe_layers = 2;
  c.adapter_bottleneck_dim = 16;
  c.gate_share_period = 2;
  return c;
}

double EncoderConfig::average_coefficient() const {
  if (average_true_mean) return 1.0 / static_cast<double>(n_moe_layers);
  return 1.0 / (2.0 * static_cast<double>(total_layers()));
}

void EncoderConfig::validate() const {
  if (d == 0 || heads == 0 || d % heads != 0) {
    throw ConfigError("encoder: d=" + std::to_string(d) + " must be a positive multiple of heads=" +
                      std::to_string(heads));
  }
  if (ffn_dim == 0 || conv_channels == 0) throw ConfigError("encoder: zero-sized ffn or conv");
  if (subsampled_length(feature_dim) == 0) {
    throw ConfigError("encoder: feature_dim " + std::to_string(feature_dim) +
                      " below the frontend minimum of " + std::to_string(kMinSubsampleInput));
  }
  if (moe_enabled) {
    if (n_moe_layers == 0) throw ConfigError("encoder: MoE enabled with zero MoE layers");
    if (adapter_bottleneck_dim == 0) throw ConfigError("encoder: adapter bottleneck must be >= 1");
    if (gate_share_period == 0 || n_moe_layers % gate_share_period != 0) {
      throw ConfigError("encoder: gate_share_period " + std::to_string(gate_share_period) +
                        " does not divide n_moe_layers " + std::to_string(n_moe_layers));
    }
  }
}

BackboneLayerParams BackboneLayerParams::create(ParamStore& store, const std::string& prefix,
                                                const EncoderConfig& cfg, std::mt19937_64& rng) {
  BackboneLayerParams p;
  p.norm_att_g = store.create(prefix + ".norm_att.gamma", {cfg.d}, Init::kOnes, rng);
  p.norm_att_b = store.create(prefix + ".norm_att.beta", {cfg.d}, Init::kZeros, rng);
  p.att = AttentionParams::create(store, prefix + ".att", cfg.d, cfg.heads, rng);
  p.norm_ffn_g = store.create(prefix + ".norm_ffn.gamma", {cfg.d}, Init::kOnes, rng);
  p.norm_ffn_b = store.create(prefix + ".norm_ffn.beta", {cfg.d}, Init::kZeros, rng);
  p.ffn_w1 = store.create(prefix + ".ffn.w1", {cfg.d, cfg.ffn_dim}, Init::kUniformFanIn, rng);
  p.ffn_b1 = store.create(prefix + ".ffn.b1", {cfg.ffn_dim}, Init::kZeros, rng);
  p.ffn_w2 = store.create(prefix + ".ffn.w2", {cfg.ffn_dim, cfg.d}, Init::kUniformFanIn, rng);
  p.ffn_b2 = store.create(prefix + ".ffn.b2", {cfg.d}, Init::kZeros, rng);
  return p;
}

BackboneLayerParams BackboneLayerParams::bind(const ParamStore& store, const std::string& prefix,
                                              const EncoderConfig& cfg) {
  BackboneLayerParams p;
  p.norm_att_g = store.get(prefix + ".norm_att.gamma");
  p.norm_att_b = store.get(prefix + ".norm_att.beta");
  p.att = AttentionParams::bind(store, prefix + ".att", cfg.heads);
  p.norm_ffn_g = store.get(prefix + ".norm_ffn.gamma");
  p.norm_ffn_b = store.get(prefix + ".norm_ffn.beta");
  p.ffn_w1 = store.get(prefix + ".ffn.w1");
  p.ffn_b1 = store.get(prefix + ".ffn.b1");
  p.ffn_w2 = store.get(prefix + ".ffn.w2");
  p.ffn_b2 = store.get(prefix + ".ffn.b2");
  return p;
}

Tensor backbone_layer_forward(const Tensor& h, const BackboneLayerParams& p) {
  const Tensor a = layer_norm(h, p.norm_att_g, p.norm_att_b);
  const Tensor h1 = add(h, multi_head_attention(a, a, a, p.att));
  const Tensor f = layer_norm(h1, p.norm_ffn_g, p.norm_ffn_b);
  return add(h1, linear(relu(linear(f, p.ffn_w1, p.ffn_b1)), p.ffn_w2, p.ffn_b2));
}

AdapterParams AdapterParams::create(ParamStore& store, const std::string& prefix, std::size_t d,
                                    std::size_t bottleneck, std::mt19937_64& rng) {
  AdapterParams p;
  p.norm_g = store.create(prefix + ".norm.gamma", {d}, Init::kOnes, rng);
  p.norm_b = store.create(prefix + ".norm.beta", {d}, Init::kZeros, rng);
  p.up_w = store.create(prefix + ".up.weight", {d, bottleneck}, Init::kUniformFanIn, rng);
  p.up_b = store.create(prefix + ".up.bias", {bottleneck}, Init::kZeros, rng);
  p.down_w = store.create(prefix + ".down.weight", {bottleneck, d}, Init::kUniformFanIn, rng);
  p.down_b = store.create(prefix + ".down.bias", {d}, Init::kZeros, rng);
  return p;
}

AdapterParams AdapterParams::bind(const ParamStore& store, const std::string& prefix) {
  return {store.get(prefix + ".norm.gamma"), store.get(prefix + ".norm.beta"),
          store.get(prefix + ".up.weight"),  store.get(prefix + ".up.bias"),
          store.get(prefix + ".down.weight"), store.get(prefix + ".down.bias")};
}

namespace {

Tensor adapter_forward(const Tensor& h, const AdapterParams& p) {
  const Tensor n = layer_norm(h, p.norm_g, p.norm_b);
  return add(h, linear(relu(linear(n, p.up_w, p.up_b)), p.down_w, p.down_b));
}

}  // namespace

AdapterOutput moe_adapter_forward(const Tensor& h, const MoEAdapterParams& adapters) {
  return {adapter_forward(h, adapters.en), adapter_forward(h, adapters.cn)};
}

GateGroupParams GateGroupParams::create(ParamStore& store, const std::string& prefix,
                                        const EncoderConfig& cfg, bool with_attention,
                                        std::mt19937_64& rng) {
  GateGroupParams p;
  if (with_attention) {
    p.self_en = AttentionParams::create(store, prefix + ".self_en", cfg.d, cfg.heads, rng);
    p.self_cn = AttentionParams::create(store, prefix + ".self_cn", cfg.d, cfg.heads, rng);
    p.src_en = AttentionParams::create(store, prefix + ".src_en", cfg.d, cfg.heads, rng);
    p.src_cn = AttentionParams::create(store, prefix + ".src_cn", cfg.d, cfg.heads, rng);
  }
  p.gate_w = store.create(prefix + ".gate.weight", {cfg.d, 2}, Init::kUniformFanIn, rng);
  return p;
}

GateGroupParams GateGroupParams::bind(const ParamStore& store, const std::string& prefix,
                                      const EncoderConfig& cfg, bool with_attention) {
  GateGroupParams p;
  if (with_attention) {
    p.self_en = AttentionParams::bind(store, prefix + ".self_en", cfg.heads);
    p.self_cn = AttentionParams::bind(store, prefix + ".self_cn", cfg.heads);
    p.src_en = AttentionParams::bind(store, prefix + ".src_en", cfg.heads);
    p.src_cn = AttentionParams::bind(store, prefix + ".src_cn", cfg.heads);
  }
  p.gate_w = store.get(prefix + ".gate.weight");
  return p;
}

MoELayerOutput linear_gate(const Tensor& h_en_src, const Tensor& h_cn_src, const Tensor& gate_w) {
  if (h_en_src.shape() != h_cn_src.shape()) {
    throw DimensionError("linear_gate: " + shape_string(h_en_src.shape()) + " vs " +
                         shape_string(h_cn_src.shape()));
  }
  MoELayerOutput out;
  out.h_en_src = h_en_src;
  out.h_cn_src = h_cn_src;
  const Tensor logits = add(matmul(h_en_src, gate_w), matmul(h_cn_src, gate_w));
  out.gate_weights = softmax_rows(logits);
  const Tensor w_en = slice_cols(out.gate_weights, 0, 1);
  const Tensor w_cn = slice_cols(out.gate_weights, 1, 2);
  out.h_en = mul_col(h_en_src, w_en);
  out.h_cn = mul_col(h_cn_src, w_cn);
  out.h_mix = convex_mix(w_en, h_en_src, h_cn_src);
  return out;
}

MoELayerOutput gated_cross_attention(const Tensor& h_en_a, const Tensor& h_cn_a,
                                     const GateGroupParams& g) {
  if (h_en_a.shape() != h_cn_a.shape()) {
    throw DimensionError("gated_cross_attention: " + shape_string(h_en_a.shape()) + " vs " +
                         shape_string(h_cn_a.shape()));
  }
  const Tensor en_self = add(h_en_a, multi_head_attention(h_en_a, h_en_a, h_en_a, g.self_en));
  const Tensor cn_self = add(h_cn_a, multi_head_attention(h_cn_a, h_cn_a, h_cn_a, g.self_cn));
  const Tensor en_src = add(en_self, multi_head_attention(en_self, cn_self, cn_self, g.src_en));
  const Tensor cn_src = add(cn_self, multi_head_attention(cn_self, en_self, en_self, g.src_cn));
  return linear_gate(en_src, cn_src, g.gate_w);
}

std::vector<std::size_t> tie_gate_weights(const EncoderConfig& cfg) {
  if (cfg.gate_share_period == 0 || cfg.n_moe_layers % cfg.gate_share_period != 0) {
    throw ConfigError("gate_share_period " + std::to_string(cfg.gate_share_period) +
                      " does not divide n_moe_layers " + std::to_string(cfg.n_moe_layers));
  }
  std::vector<std::size_t> groups(cfg.n_moe_layers);
  for (std::size_t i = 0; i < groups.size(); ++i) groups[i] = i / cfg.gate_share_period;
  return groups;
}

Tensor sinusoidal_positions(std::size_t length, std::size_t d) {
  std::vector<double> pe(length * d);
  for (std::size_t t = 0; t < length; ++t)
    for (std::size_t i = 0; i < d; i += 2) {
      const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / static_cast<double>(d));
      pe[t * d + i] = std::sin(static_cast<double>(t) * freq);
      if (i + 1 < d) pe[t * d + i + 1] = std::cos(static_cast<double>(t) * freq);
    }
  return Tensor::from({length, d}, std::move(pe));
}

bool Encoder::has_gate() const {
  return cfg_.moe_enabled && cfg_.fusion_mode != FusionMode::kNone;
}

bool Encoder::has_cross_attention() const {
  return cfg_.moe_enabled && cfg_.fusion_mode == FusionMode::kGatedCrossAttention;
}

Encoder::Encoder(const EncoderConfig& cfg, ParamStore& store, std::mt19937_64& rng) : cfg_(cfg) {
  cfg_.validate();
  frontend_ = ConvFrontendParams::create(store, "encoder.frontend", cfg_.feature_dim,
                                         cfg_.conv_channels, cfg_.d, rng);
  for (std::size_t i = 0; i < cfg_.total_layers(); ++i) {
    layers_.push_back(
        BackboneLayerParams::create(store, "encoder.backbone." + std::to_string(i), cfg_, rng));
  }
  if (cfg_.moe_enabled) {
    for (std::size_t i = 0; i < cfg_.n_moe_layers; ++i) {
      const std::string prefix = "encoder.moe." + std::to_string(i) + ".adapter";
      adapters_.push_back({AdapterParams::create(store, prefix + ".en", cfg_.d,
                                                 cfg_.adapter_bottleneck_dim, rng),
                           AdapterParams::create(store, prefix + ".cn", cfg_.d,
                                                 cfg_.adapter_bottleneck_dim, rng)});
    }
    if (has_gate()) {
      group_of_layer_ = tie_gate_weights(cfg_);
      const std::size_t n_groups = cfg_.n_moe_layers / cfg_.gate_share_period;
      for (std::size_t g = 0; g < n_groups; ++g) {
        gate_groups_.push_back(GateGroupParams::create(
            store, "encoder.moe.gate_group." + std::to_string(g), cfg_, has_cross_attention(), rng));
      }
    }
  }
  final_norm_g_ = store.create("encoder.final_norm.gamma", {cfg_.d}, Init::kOnes, rng);
  final_norm_b_ = store.create("encoder.final_norm.beta", {cfg_.d}, Init::kZeros, rng);
}

Encoder::Encoder(const EncoderConfig& cfg, const ParamStore& store) : cfg_(cfg) {
  cfg_.validate();
  frontend_ = ConvFrontendParams::bind(store, "encoder.frontend");
  for (std::size_t i = 0; i < cfg_.total_layers(); ++i) {
    layers_.push_back(
        BackboneLayerParams::bind(store, "encoder.backbone." + std::to_string(i), cfg_));
  }
  if (cfg_.moe_enabled) {
    for (std::size_t i = 0; i < cfg_.n_moe_layers; ++i) {
      const std::string prefix = "encoder.moe." + std::to_string(i) + ".adapter";
      adapters_.push_back(
          {AdapterParams::bind(store, prefix + ".en"), AdapterParams::bind(store, prefix + ".cn")});
    }
    if (has_gate()) {
      group_of_layer_ = tie_gate_weights(cfg_);
      const std::size_t n_groups = cfg_.n_moe_layers / cfg_.gate_share_period;
      for (std::size_t g = 0; g < n_groups; ++g) {
        gate_groups_.push_back(GateGroupParams::bind(
            store, "encoder.moe.gate_group." + std::to_string(g), cfg_, has_cross_attention()));
      }
    }
  }
  final_norm_g_ = store.get("encoder.final_norm.gamma");
  final_norm_b_ = store.get("encoder.final_norm.beta");
}

EncoderOutput Encoder::encode(const Tensor& features) const {
  if (features.rank() != 2 || features.cols() != cfg_.feature_dim) {
    throw DimensionError("encode: expected [T," + std::to_string(cfg_.feature_dim) +
                         "] features, got " + shape_string(features.shape()));
  }
  Tensor h = conv_downsample(features, frontend_);
  h = add(scale(h, std::sqrt(static_cast<double>(cfg_.d))), sinusoidal_positions(h.rows(), cfg_.d));

  EncoderOutput out;
  for (std::size_t i = 0; i < cfg_.n_backbone_layers; ++i) h = backbone_layer_forward(h, layers_[i]);

  std::vector<Tensor> en_terms, cn_terms;
  for (std::size_t m = 0; m < cfg_.n_moe_layers; ++m) {
    h = backbone_layer_forward(h, layers_[cfg_.n_backbone_layers + m]);
    if (!cfg_.moe_enabled) continue;
    const AdapterOutput a = moe_adapter_forward(h, adapters_[m]);
    MoELayerOutput layer;
    switch (cfg_.fusion_mode) {
      case FusionMode::kNone:
        layer.h_mix = h;
        layer.h_en_src = layer.h_en = a.h_en_a;
        layer.h_cn_src = layer.h_cn = a.h_cn_a;
        break;
      case FusionMode::kLinearGate:
        layer = linear_gate(a.h_en_a, a.h_cn_a, gate_groups_[group_of_layer_[m]].gate_w);
        break;
      case FusionMode::kGatedCrossAttention:
        layer = gated_cross_attention(a.h_en_a, a.h_cn_a, gate_groups_[group_of_layer_[m]]);
        break;
    }
    h = layer.h_mix;
    // Averages take the pre-gate language representations.
    en_terms.push_back(layer.h_en_src);
    cn_terms.push_back(layer.h_cn_src);
    out.per_layer.push_back(std::move(layer));
  }

  if (cfg_.moe_enabled) {
    Tensor en = en_terms.front(), cn = cn_terms.front();
    for (std::size_t i = 1; i < en_terms.size(); ++i) {
      en = add(en, en_terms[i]);
      cn = add(cn, cn_terms[i]);
    }
    out.h_en_avg = scale(en, cfg_.average_coefficient());
    out.h_cn_avg = scale(cn, cfg_.average_coefficient());
  }
  out.h_out = layer_norm(h, final_norm_g_, final_norm_b_);
  return out;
}

}  // namespace camel

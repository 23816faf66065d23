#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "camel/numerics/attention.hpp"
#include "camel/numerics/conv.hpp"
#include "camel/numerics/param_store.hpp"

namespace camel {

/// How the two adapter outputs of a MoE layer are combined.
///   kNone                 adapters only feed the language averages (S1)
///   kLinearGate           frame-level softmax gate on the adapter outputs (S2)
///   kGatedCrossAttention  self/src cross-attention, then the gate (S3, CAMEL)
enum class FusionMode { kNone, kLinearGate, kGatedCrossAttention };

const char* fusion_mode_name(FusionMode mode);
FusionMode parse_fusion_mode(const std::string& name);

struct EncoderConfig {
  std::size_t feature_dim = 20;
  std::size_t conv_channels = 32;
  std::size_t d = 64;
  std::size_t heads = 2;
  std::size_t ffn_dim = 128;
  std::size_t n_backbone_layers = 2;
  std::size_t n_moe_layers = 2;
  std::size_t adapter_bottleneck_dim = 16;
  std::size_t gate_share_period = 2;
  FusionMode fusion_mode = FusionMode::kGatedCrossAttention;
  bool moe_enabled = true;
  // Language averages divide by n_moe_layers instead of 2 * total layers.
  bool average_true_mean = false;

  static EncoderConfig full_preset();
  static EncoderConfig desk_preset();

  std::size_t total_layers() const { return n_backbone_layers + n_moe_layers; }
  double average_coefficient() const;
  void validate() const;
};

/// Pre-norm block: h + MHSA(LN(h)), then + FFN(LN(.)).
struct BackboneLayerParams {
  Tensor norm_att_g, norm_att_b;
  AttentionParams att;
  Tensor norm_ffn_g, norm_ffn_b;
  Tensor ffn_w1, ffn_b1, ffn_w2, ffn_b2;

  static BackboneLayerParams create(ParamStore& store, const std::string& prefix,
                                    const EncoderConfig& cfg, std::mt19937_64& rng);
  static BackboneLayerParams bind(const ParamStore& store, const std::string& prefix,
                                  const EncoderConfig& cfg);
};

Tensor backbone_layer_forward(const Tensor& h, const BackboneLayerParams& p);

/// One language expert: LayerNorm -> up-projection -> ReLU -> down-projection.
struct AdapterParams {
  Tensor norm_g, norm_b, up_w, up_b, down_w, down_b;

  static AdapterParams create(ParamStore& store, const std::string& prefix, std::size_t d,
                              std::size_t bottleneck, std::mt19937_64& rng);
  static AdapterParams bind(const ParamStore& store, const std::string& prefix);
};

struct MoEAdapterParams {
  AdapterParams en;
  AdapterParams cn;
};

struct AdapterOutput {
  Tensor h_en_a;
  Tensor h_cn_a;
};

// h_x = h + W_x^D(ReLU(W_x^U(LayerNorm_x(h)))) for x in {en, cn}.
AdapterOutput moe_adapter_forward(const Tensor& h, const MoEAdapterParams& adapters);

/// Parameters of one (possibly shared) gated cross-attention group.
struct GateGroupParams {
  AttentionParams self_en, self_cn, src_en, src_cn;
  Tensor gate_w;  // [d, 2], no bias

  static GateGroupParams create(ParamStore& store, const std::string& prefix,
                                const EncoderConfig& cfg, bool with_attention,
                                std::mt19937_64& rng);
  static GateGroupParams bind(const ParamStore& store, const std::string& prefix,
                              const EncoderConfig& cfg, bool with_attention);
};

struct MoELayerOutput {
  Tensor h_mix;
  Tensor h_en_src;
  Tensor h_cn_src;
  Tensor gate_weights;  // [T', 2] columns (w_en, w_cn); undefined without a gate
  // Gated language representations w_en * h_en_src and w_cn * h_cn_src; the
  // plain adapter outputs when there is no gate.
  Tensor h_en;
  Tensor h_cn;
};

/// Frame-level softmax gate over (h_en_src + h_cn_src) W^G. The mixture is
/// evaluated as h_cn + w_en (h_en - h_cn), so identical inputs pass through
/// bit-for-bit.
MoELayerOutput linear_gate(const Tensor& h_en_src, const Tensor& h_cn_src, const Tensor& gate_w);

/// Self-attention with residual per language, then src-attention in which
/// each language queries the other, then the linear gate.
MoELayerOutput gated_cross_attention(const Tensor& h_en_a, const Tensor& h_cn_a,
                                     const GateGroupParams& group);

/// Gate-group index of every MoE layer: layers {0..p-1} share group 0, the
/// next p layers group 1, and so on. Throws ConfigError when the period does
/// not divide the MoE layer count.
std::vector<std::size_t> tie_gate_weights(const EncoderConfig& cfg);

struct EncoderOutput {
  Tensor h_out;
  Tensor h_en_avg;  // undefined when MoE is disabled
  Tensor h_cn_avg;
  std::vector<MoELayerOutput> per_layer;
};

Tensor sinusoidal_positions(std::size_t length, std::size_t d);

/// Switched MoE encoder: conv frontend, n_backbone standard layers, then
/// n_moe layers of backbone block -> MoE adapter -> fusion. Parameter names:
/// encoder.frontend.*, encoder.backbone.{i}.* (MoE-layer blocks continue the
/// numbering), encoder.moe.{i}.adapter.{en|cn}.*, encoder.moe.gate_group.{g}.*,
/// encoder.final_norm.*.
class Encoder {
 public:
  Encoder(const EncoderConfig& cfg, ParamStore& store, std::mt19937_64& rng);
  Encoder(const EncoderConfig& cfg, const ParamStore& store);

  EncoderOutput encode(const Tensor& features) const;
  const EncoderConfig& config() const { return cfg_; }

  // Output length for an input of `frames` frames (0 if too short).
  static std::size_t output_length(std::size_t frames) { return subsampled_length(frames); }

 private:
  bool has_gate() const;
  bool has_cross_attention() const;

  EncoderConfig cfg_;
  ConvFrontendParams frontend_;
  std::vector<BackboneLayerParams> layers_;
  std::vector<MoEAdapterParams> adapters_;
  std::vector<GateGroupParams> gate_groups_;
  std::vector<std::size_t> group_of_layer_;
  Tensor final_norm_g_, final_norm_b_;
};

}  // namespace camel

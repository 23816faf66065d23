#include "camel/training/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <set>
#include <sstream>

#include "camel/errors.hpp"

namespace camel {

namespace pt = boost::property_tree;

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kBaseline:
      return "baseline";
    case Variant::kS1:
      return "s1";
    case Variant::kS2:
      return "s2";
    case Variant::kS3:
      return "s3";
    case Variant::kCamel:
      return "camel";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  if (name == "baseline") return Variant::kBaseline;
  if (name == "s1") return Variant::kS1;
  if (name == "s2") return Variant::kS2;
  if (name == "s3") return Variant::kS3;
  if (name == "camel") return Variant::kCamel;
  throw ConfigError("unknown variant '" + name + "' (expected baseline|s1|s2|s3|camel)");
}

void LossWeights::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("loss.lambda must lie in [0,1]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("loss.alpha must lie in [0,1]");
  if (!(beta >= 0.0)) throw ConfigError("loss.beta must be non-negative");
}

void ModelConfig::apply_variant() {
  encoder.moe_enabled = variant != Variant::kBaseline;
  switch (variant) {
    case Variant::kBaseline:
    case Variant::kS1:
      encoder.fusion_mode = FusionMode::kNone;
      break;
    case Variant::kS2:
      encoder.fusion_mode = FusionMode::kLinearGate;
      break;
    case Variant::kS3:
    case Variant::kCamel:
      encoder.fusion_mode = FusionMode::kGatedCrossAttention;
      break;
  }
  decoder.ld_enabled = variant == Variant::kCamel;
  decoder.d = encoder.d;
  decoder.heads = encoder.heads;
  decoder.ffn_dim = encoder.ffn_dim;
}

void ModelConfig::validate() const {
  encoder.validate();
  decoder.validate();
  if (decoder.d != encoder.d) {
    throw ConfigError("decoder d=" + std::to_string(decoder.d) + " differs from encoder d=" +
                      std::to_string(encoder.d));
  }
  ModelConfig expected = *this;
  expected.apply_variant();
  if (expected.encoder.moe_enabled != encoder.moe_enabled ||
      expected.encoder.fusion_mode != encoder.fusion_mode ||
      expected.decoder.ld_enabled != decoder.ld_enabled) {
    throw ConfigError(std::string("architecture switches disagree with variant '") +
                      variant_name(variant) + "'");
  }
}

std::uint64_t ModelConfig::hash() const {
  std::ostringstream os;
  os << "variant=" << variant_name(variant) << ";feature_dim=" << encoder.feature_dim
     << ";conv_channels=" << encoder.conv_channels << ";d=" << encoder.d
     << ";heads=" << encoder.heads << ";ffn=" << encoder.ffn_dim
     << ";backbone=" << encoder.n_backbone_layers << ";moe=" << encoder.n_moe_layers
     << ";bottleneck=" << encoder.adapter_bottleneck_dim
     << ";share=" << encoder.gate_share_period
     << ";fusion=" << fusion_mode_name(encoder.fusion_mode)
     << ";moe_enabled=" << encoder.moe_enabled << ";average_true_mean=" << encoder.average_true_mean
     << ";dec_layers=" << decoder.n_layers << ";vocab=" << decoder.vocab_size
     << ";ld=" << decoder.ld_enabled;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : os.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ModelConfig ModelConfig::desk(Variant v, std::size_t vocab_size, std::size_t feature_dim) {
  ModelConfig c;
  c.variant = v;
  c.encoder.feature_dim = feature_dim;
  c.decoder.vocab_size = vocab_size;
  c.apply_variant();
  return c;
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("train.epochs must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be positive");
  if (batch_size == 0) throw ConfigError("train.batch_size must be positive");
  if (average_last_k == 0) throw ConfigError("train.average_last_k must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ConfigError("train.adam_beta1/adam_beta2 must lie in [0,1)");
  }
}

namespace {

template <typename T>
void read(const pt::ptree& tree, const std::string& key, T& field) {
  if (auto v = tree.get_optional<T>(key)) field = *v;
}

void read_bool(const pt::ptree& tree, const std::string& key, bool& field) {
  if (auto v = tree.get_optional<std::string>(key)) {
    if (*v == "true" || *v == "1") {
      field = true;
    } else if (*v == "false" || *v == "0") {
      field = false;
    } else {
      throw ConfigError("config key " + key + ": expected true/false, got '" + *v + "'");
    }
  }
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "model.variant",
      "encoder.feature_dim", "encoder.conv_channels", "encoder.d", "encoder.heads",
      "encoder.ffn_dim", "encoder.n_backbone_layers", "encoder.n_moe_layers",
      "encoder.adapter_bottleneck_dim", "encoder.gate_share_period", "encoder.average_true_mean",
      "decoder.n_layers", "decoder.vocab_size",
      "loss.lambda", "loss.alpha", "loss.beta",
      "train.epochs", "train.learning_rate", "train.adam_beta1", "train.adam_beta2",
      "train.adam_eps", "train.batch_size", "train.warmup_steps", "train.grad_clip",
      "train.seed", "train.average_last_k",
      "synth.n_utts", "synth.vocab_a_size", "synth.vocab_b_size", "synth.frames_per_token",
      "synth.feature_dim", "synth.noise_std", "synth.switch_prob", "synth.min_len",
      "synth.max_len"};
  return keys;
}

}  // namespace

Config Config::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("config file not found: " + path.string());
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    for (const auto& [key, _] : body) {
      if (!known_keys().contains(section + "." + key)) {
        throw ConfigError("unknown config key '" + section + "." + key + "' in " + path.string());
      }
    }
  }

  Config c;
  try {
    std::string variant = variant_name(c.model.variant);
    read(tree, "model.variant", variant);
    c.model.variant = parse_variant(variant);
    auto& e = c.model.encoder;
    read(tree, "encoder.feature_dim", e.feature_dim);
    read(tree, "encoder.conv_channels", e.conv_channels);
    read(tree, "encoder.d", e.d);
    read(tree, "encoder.heads", e.heads);
    read(tree, "encoder.ffn_dim", e.ffn_dim);
    read(tree, "encoder.n_backbone_layers", e.n_backbone_layers);
    read(tree, "encoder.n_moe_layers", e.n_moe_layers);
    read(tree, "encoder.adapter_bottleneck_dim", e.adapter_bottleneck_dim);
    read(tree, "encoder.gate_share_period", e.gate_share_period);
    read_bool(tree, "encoder.average_true_mean", e.average_true_mean);
    read(tree, "decoder.n_layers", c.model.decoder.n_layers);
    read(tree, "decoder.vocab_size", c.model.decoder.vocab_size);
    read(tree, "loss.lambda", c.loss.lambda);
    read(tree, "loss.alpha", c.loss.alpha);
    read(tree, "loss.beta", c.loss.beta);
    auto& t = c.train;
    read(tree, "train.epochs", t.epochs);
    read(tree, "train.learning_rate", t.learning_rate);
    read(tree, "train.adam_beta1", t.adam_beta1);
    read(tree, "train.adam_beta2", t.adam_beta2);
    read(tree, "train.adam_eps", t.adam_eps);
    read(tree, "train.batch_size", t.batch_size);
    read(tree, "train.warmup_steps", t.warmup_steps);
    read(tree, "train.grad_clip", t.grad_clip);
    read(tree, "train.seed", t.seed);
    read(tree, "train.average_last_k", t.average_last_k);
    auto& s = c.synth;
    read(tree, "synth.n_utts", s.n_utts);
    read(tree, "synth.vocab_a_size", s.vocab_a_size);
    read(tree, "synth.vocab_b_size", s.vocab_b_size);
    read(tree, "synth.frames_per_token", s.frames_per_token);
    read(tree, "synth.feature_dim", s.feature_dim);
    read(tree, "synth.noise_std", s.noise_std);
    read(tree, "synth.switch_prob", s.switch_prob);
    read(tree, "synth.min_len", s.min_len);
    read(tree, "synth.max_len", s.max_len);
  } catch (const pt::ptree_bad_data& e) {
    throw ConfigError(std::string("config value error: ") + e.what());
  }
  c.model.apply_variant();
  c.loss.validate();
  c.train.validate();
  return c;
}

void Config::save(const std::filesystem::path& path) const {
  pt::ptree tree;
  tree.put("model.variant", variant_name(model.variant));
  const auto& e = model.encoder;
  tree.put("encoder.feature_dim", e.feature_dim);
  tree.put("encoder.conv_channels", e.conv_channels);
  tree.put("encoder.d", e.d);
  tree.put("encoder.heads", e.heads);
  tree.put("encoder.ffn_dim", e.ffn_dim);
  tree.put("encoder.n_backbone_layers", e.n_backbone_layers);
  tree.put("encoder.n_moe_layers", e.n_moe_layers);
  tree.put("encoder.adapter_bottleneck_dim", e.adapter_bottleneck_dim);
  tree.put("encoder.gate_share_period", e.gate_share_period);
  tree.put("encoder.average_true_mean", e.average_true_mean ? "true" : "false");
  tree.put("decoder.n_layers", model.decoder.n_layers);
  tree.put("decoder.vocab_size", model.decoder.vocab_size);
  tree.put("loss.lambda", loss.lambda);
  tree.put("loss.alpha", loss.alpha);
  tree.put("loss.beta", loss.beta);
  tree.put("train.epochs", train.epochs);
  tree.put("train.learning_rate", train.learning_rate);
  tree.put("train.adam_beta1", train.adam_beta1);
  tree.put("train.adam_beta2", train.adam_beta2);
  tree.put("train.adam_eps", train.adam_eps);
  tree.put("train.batch_size", train.batch_size);
  tree.put("train.warmup_steps", train.warmup_steps);
  tree.put("train.grad_clip", train.grad_clip);
  tree.put("train.seed", train.seed);
  tree.put("train.average_last_k", train.average_last_k);
  tree.put("synth.n_utts", synth.n_utts);
  tree.put("synth.vocab_a_size", synth.vocab_a_size);
  tree.put("synth.vocab_b_size", synth.vocab_b_size);
  tree.put("synth.frames_per_token", synth.frames_per_token);
  tree.put("synth.feature_dim", synth.feature_dim);
  tree.put("synth.noise_std", synth.noise_std);
  tree.put("synth.switch_prob", synth.switch_prob);
  tree.put("synth.min_len", synth.min_len);
  tree.put("synth.max_len", synth.max_len);
  pt::write_ini(path.string(), tree);
}

}  // namespace camel

#include "camel/training/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <random>

#include "camel/errors.hpp"
#include "camel/numerics/ops.hpp"

namespace camel {

void Adam::step(ParamStore& params) {
  ++t_;
  double lr = cfg_.learning_rate;
  if (cfg_.warmup_steps > 0 && t_ < cfg_.warmup_steps) {
    lr *= static_cast<double>(t_) / static_cast<double>(cfg_.warmup_steps);
  }
  double clip_scale = 1.0;
  if (cfg_.grad_clip > 0.0) {
    double sq = 0.0;
    for (const auto& [_, p] : params.entries())
      if (p.has_grad())
        for (double g : p.grad()) sq += g * g;
    const double norm = std::sqrt(sq);
    if (norm > cfg_.grad_clip) clip_scale = cfg_.grad_clip / norm;
  }
  const double bc1 = 1.0 - std::pow(cfg_.adam_beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.adam_beta2, static_cast<double>(t_));
  for (const auto& [name, tensor] : params.entries()) {
    Tensor p = tensor;
    if (!p.has_grad()) continue;
    auto& [m, v] = moments_[name];
    if (m.empty()) {
      m.assign(p.numel(), 0.0);
      v.assign(p.numel(), 0.0);
    }
    const auto g = p.grad();
    auto x = p.mutable_data();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double gi = g[i] * clip_scale;
      m[i] = cfg_.adam_beta1 * m[i] + (1.0 - cfg_.adam_beta1) * gi;
      v[i] = cfg_.adam_beta2 * v[i] + (1.0 - cfg_.adam_beta2) * gi * gi;
      x[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg_.adam_eps);
    }
  }
}

namespace {

void accumulate(LossValues& acc, const LossValues& v) {
  acc.total += v.total;
  acc.ctc += v.ctc;
  acc.en_ctc += v.en_ctc;
  acc.cn_ctc += v.cn_ctc;
  acc.ce += v.ce;
  acc.ld_ce += v.ld_ce;
}

LossValues divided(LossValues v, std::size_t n) {
  const double k = n ? 1.0 / static_cast<double>(n) : 0.0;
  v.total *= k;
  v.ctc *= k;
  v.en_ctc *= k;
  v.cn_ctc *= k;
  v.ce *= k;
  v.ld_ce *= k;
  return v;
}

nlohmann::json to_json(const LossValues& v) {
  return {{"total", v.total}, {"ctc", v.ctc},   {"en_ctc", v.en_ctc},
          {"cn_ctc", v.cn_ctc}, {"ce", v.ce}, {"ld_ce", v.ld_ce}};
}

std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (epoch + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

LossValues evaluate_loss(const CamelModel& model, const std::vector<Utterance>& utts,
                         const Vocabulary& vocab, const LossWeights& weights) {
  NoGradGuard no_grad;
  LossValues acc;
  for (const auto& u : utts) accumulate(acc, model.loss(u, vocab, weights).values);
  return divided(acc, utts.size());
}

std::vector<EpochRecord> train(CamelModel& model, const TrainConfig& cfg,
                               const LossWeights& weights, const std::vector<Utterance>& train_set,
                               const std::vector<Utterance>& dev_set, const Vocabulary& vocab,
                               const std::filesystem::path& out_dir,
                               const EpochCallback& on_epoch) {
  cfg.validate();
  weights.validate();
  if (train_set.empty()) throw ConfigError("training set is empty");
  std::filesystem::create_directories(out_dir);
  std::ofstream metrics(out_dir / "metrics.jsonl", std::ios::trunc);
  if (!metrics) throw IoError("cannot write metrics log in " + out_dir.string());

  Adam adam(cfg);
  std::vector<EpochRecord> log;
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(epoch_seed(cfg.seed, epoch));
    // Fisher-Yates on raw engine output keeps the order library-independent.
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    LossValues epoch_acc;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double norm = 1.0 / static_cast<double>(end - start);
      model.params().zero_grad();
      for (std::size_t i = start; i < end; ++i) {
        const Utterance& u = train_set[order[i]];
        LossBreakdown l;
        try {
          l = model.loss(u, vocab, weights);
        } catch (const NonFiniteError& e) {
          throw TrainingDivergedError("epoch " + std::to_string(epoch) + ", utterance " + u.id +
                                      ": " + e.what());
        }
        if (!std::isfinite(l.values.total)) {
          throw TrainingDivergedError("epoch " + std::to_string(epoch) + ", utterance " + u.id +
                                      ": non-finite loss");
        }
        scale(l.total, norm).backward();
        accumulate(epoch_acc, l.values);
      }
      adam.step(model.params());
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_components = divided(epoch_acc, train_set.size());
    rec.train_loss = rec.train_components.total;
    rec.dev_components = evaluate_loss(model, dev_set.empty() ? train_set : dev_set, vocab, weights);
    rec.dev_loss = rec.dev_components.total;
    if (!std::isfinite(rec.dev_loss)) {
      throw TrainingDivergedError("epoch " + std::to_string(epoch) + ": dev loss is not finite");
    }
    char name[32];
    std::snprintf(name, sizeof(name), "epoch_%03zu.ckpt", epoch);
    rec.checkpoint = (out_dir / name).string();
    save_checkpoint(rec.checkpoint, model.params(),
                    {model.config().hash(), static_cast<std::uint32_t>(epoch), rec.dev_loss});

    const nlohmann::json line = {{"epoch", epoch},
                                 {"train_loss", rec.train_loss},
                                 {"dev_loss", rec.dev_loss},
                                 {"train", to_json(rec.train_components)},
                                 {"dev", to_json(rec.dev_components)},
                                 {"checkpoint", name}};
    metrics << line.dump() << '\n' << std::flush;
    if (on_epoch) on_epoch(rec);
    log.push_back(std::move(rec));
  }
  return log;
}

}  // namespace camel

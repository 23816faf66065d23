#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "camel/errors.hpp"
#include "camel/training/model.hpp"

namespace camel {

class TrainingDivergedError : public Error {
 public:
  using Error::Error;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_loss = 0.0;
  LossValues train_components;  // per-utterance means over the epoch
  LossValues dev_components;
  std::string checkpoint;
};

/// Adam with bias correction and an optional linear warmup.
class Adam {
 public:
  explicit Adam(const TrainConfig& cfg) : cfg_(cfg) {}
  void step(ParamStore& params);
  std::size_t steps() const { return t_; }

 private:
  TrainConfig cfg_;
  std::size_t t_ = 0;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> moments_;
};

/// Mean per-utterance total loss (and components) without recording a graph.
LossValues evaluate_loss(const CamelModel& model, const std::vector<Utterance>& utts,
                         const Vocabulary& vocab, const LossWeights& weights);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains `model` in place. Each epoch shuffles the training set with a
/// stream seeded by (seed, epoch), takes per-utterance batches of
/// `batch_size`, normalizes the summed loss by the batch's utterance count
/// and applies one Adam step per batch. After every epoch the dev loss is
/// computed, `epoch_NNN.ckpt` is written and one JSON line is appended to
/// `metrics.jsonl` in `out_dir`. A non-finite loss raises
/// TrainingDivergedError; checkpoints of completed epochs are left in place.
std::vector<EpochRecord> train(CamelModel& model, const TrainConfig& cfg,
                               const LossWeights& weights, const std::vector<Utterance>& train_set,
                               const std::vector<Utterance>& dev_set, const Vocabulary& vocab,
                               const std::filesystem::path& out_dir,
                               const EpochCallback& on_epoch = {});

/// Loads every checkpoint, keeps the `k` with the lowest recorded dev loss
/// (ties broken by list order) and returns their per-tensor arithmetic mean.
/// Names, shapes and config hashes must all agree.
Checkpoint average_checkpoints(const std::vector<std::filesystem::path>& paths, std::size_t k);

/// Indices of the k lowest dev losses, in ascending-loss order.
std::vector<std::size_t> select_lowest(const std::vector<double>& dev_losses, std::size_t k);

}  // namespace camel

#include <algorithm>
#include <numeric>

#include "camel/errors.hpp"
#include "camel/training/trainer.hpp"

namespace camel {

std::vector<std::size_t> select_lowest(const std::vector<double>& dev_losses, std::size_t k) {
  if (k == 0 || k > dev_losses.size()) {
    throw ConfigError("cannot select " + std::to_string(k) + " of " +
                      std::to_string(dev_losses.size()) + " checkpoints");
  }
  std::vector<std::size_t> idx(dev_losses.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return dev_losses[a] < dev_losses[b]; });
  idx.resize(k);
  return idx;
}

Checkpoint average_checkpoints(const std::vector<std::filesystem::path>& paths, std::size_t k) {
  if (paths.empty()) throw ConfigError("no checkpoints to average");
  std::vector<Checkpoint> all;
  all.reserve(paths.size());
  std::vector<double> losses;
  for (const auto& p : paths) {
    all.push_back(load_checkpoint(p));
    losses.push_back(all.back().meta.dev_loss);
  }
  const auto chosen = select_lowest(losses, k);

  const Checkpoint& first = all[chosen.front()];
  Checkpoint out;
  out.params = first.params.clone();
  out.meta.config_hash = first.meta.config_hash;
  out.meta.epoch = 0;
  double loss_sum = 0.0;
  for (auto i : chosen) {
    const Checkpoint& c = all[i];
    if (c.meta.config_hash != first.meta.config_hash) {
      throw IncompatibleCheckpointError(paths[i].string() + ": config hash differs from " +
                                        paths[chosen.front()].string());
    }
    // assign_values performs the name/shape validation.
    ParamStore probe = out.params.clone();
    try {
      probe.assign_values(c.params);
    } catch (const IncompatibleCheckpointError& e) {
      throw IncompatibleCheckpointError(paths[i].string() + ": " + e.what());
    }
    loss_sum += c.meta.dev_loss;
  }
  for (const auto& [name, tensor] : out.params.entries()) {
    Tensor t = tensor;
    auto acc = t.mutable_data();
    std::fill(acc.begin(), acc.end(), 0.0);
    for (auto i : chosen) {
      const auto src = all[i].params.get(name).data();
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += src[j];
    }
    for (auto& v : acc) v /= static_cast<double>(chosen.size());
  }
  out.meta.dev_loss = loss_sum / static_cast<double>(chosen.size());
  return out;
}

}  // namespace camel

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>

#include "camel/numerics/tensor.hpp"

namespace camel {

enum class Init { kUniformFanIn, kZeros, kOnes };

/// Named parameter tensors, iterated in lexicographic name order.
///
/// Every entry requires a gradient. Handles returned by `create`/`get` alias
/// the stored tensor, so in-place updates are visible to every module holding
/// them.
class ParamStore {
 public:
  using Map = std::map<std::string, Tensor>;

  // Uniform in +-sqrt(1/fan_in), fan_in being the first dimension for
  // matrices and the product of trailing dimensions for conv kernels.
  Tensor create(const std::string& name, Shape shape, Init init, std::mt19937_64& rng);
  void insert(const std::string& name, Tensor tensor);

  bool contains(const std::string& name) const { return entries_.contains(name); }
  Tensor get(const std::string& name) const;
  const Map& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t element_count() const;

  void zero_grad();

  // Copies values from `other`, which must carry exactly the same names and
  // shapes; throws IncompatibleCheckpointError otherwise.
  void assign_values(const ParamStore& other);

  // Deep copy with fresh storage.
  ParamStore clone() const;

 private:
  Map entries_;
};

struct CheckpointMeta {
  std::uint64_t config_hash = 0;
  std::uint32_t epoch = 0;
  double dev_loss = 0.0;
};

inline constexpr char kCheckpointMagic[] = "CAMELCKPT1";

/// Binary layout: magic "CAMELCKPT1"; u64 config hash, u32 epoch, f64 dev
/// loss; u32 tensor count; then per tensor u32 name length, name bytes, u32
/// rank, u32 dims, float32 payload. All little-endian, names sorted.
void save_checkpoint(const std::filesystem::path& path, const ParamStore& params,
                     const CheckpointMeta& meta);

struct Checkpoint {
  ParamStore params;
  CheckpointMeta meta;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace camel

#pragma once

#include <filesystem>

#include "camel/numerics/tensor.hpp"

namespace camel {

/// T x F frame matrix. Values are stored as float32 on disk, so in-memory
/// sequences that came from a file are exactly float-representable.
struct FeatureSequence {
  Tensor frames;

  std::size_t num_frames() const { return frames.rows(); }
  std::size_t feature_dim() const { return frames.cols(); }
};

inline constexpr char kFeatureMagic[] = "CAMELFEAT1";

// magic "CAMELFEAT1", u32 T, u32 F, float32 little-endian row-major payload.
void write_features(const std::filesystem::path& path, const FeatureSequence& features);
FeatureSequence load_features(const std::filesystem::path& path);

}  // namespace camel

#include "camel/dataio/features.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "camel/errors.hpp"

namespace camel {

static_assert(std::endian::native == std::endian::little,
              "feature I/O assumes a little-endian host");

void write_features(const std::filesystem::path& path, const FeatureSequence& features) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open feature file for writing: " + path.string());
  os.write(kFeatureMagic, sizeof(kFeatureMagic) - 1);
  const auto t = static_cast<std::uint32_t>(features.num_frames());
  const auto f = static_cast<std::uint32_t>(features.feature_dim());
  os.write(reinterpret_cast<const char*>(&t), 4);
  os.write(reinterpret_cast<const char*>(&f), 4);
  for (double v : features.frames.data()) {
    const auto x = static_cast<float>(v);
    os.write(reinterpret_cast<const char*>(&x), 4);
  }
  if (!os) throw IoError("failed writing feature file: " + path.string());
}

FeatureSequence load_features(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open feature file: " + path.string());
  const std::vector<char> bytes((std::istreambuf_iterator<char>(is)),
                                std::istreambuf_iterator<char>());
  const std::size_t magic_len = sizeof(kFeatureMagic) - 1;
  const std::size_t header = magic_len + 8;
  if (bytes.size() < magic_len || std::memcmp(bytes.data(), kFeatureMagic, magic_len) != 0) {
    throw FormatError(path.string() + ": bad magic at byte offset 0");
  }
  if (bytes.size() < header) {
    throw FormatError(path.string() + ": truncated header at byte offset " +
                      std::to_string(bytes.size()) + " (expected " + std::to_string(header) +
                      " header bytes)");
  }
  std::uint32_t t = 0, f = 0;
  std::memcpy(&t, bytes.data() + magic_len, 4);
  std::memcpy(&f, bytes.data() + magic_len + 4, 4);
  if (t == 0 || f == 0) {
    throw FormatError(path.string() + ": empty feature matrix " + std::to_string(t) + "x" +
                      std::to_string(f) + " at byte offset " + std::to_string(magic_len) +
                      " (T >= 1 and F >= 1 required)");
  }
  const std::size_t expected = header + static_cast<std::size_t>(t) * f * 4;
  if (bytes.size() != expected) {
    throw FormatError(path.string() + ": payload length mismatch at byte offset " +
                      std::to_string(std::min(bytes.size(), expected)) + ": expected " +
                      std::to_string(expected) + " bytes, actual " +
                      std::to_string(bytes.size()));
  }
  std::vector<double> values(static_cast<std::size_t>(t) * f);
  for (std::size_t i = 0; i < values.size(); ++i) {
    float x;
    std::memcpy(&x, bytes.data() + header + 4 * i, 4);
    values[i] = x;
  }
  return {Tensor::from({t, f}, std::move(values))};
}

}  // namespace camel

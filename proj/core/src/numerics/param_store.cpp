#include "camel/numerics/param_store.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "camel/errors.hpp"

namespace camel {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

Tensor ParamStore::create(const std::string& name, Shape shape, Init init,
                          std::mt19937_64& rng) {
  if (entries_.contains(name)) throw ConfigError("duplicate parameter name: " + name);
  const std::size_t n = shape_numel(shape);
  std::vector<double> values(n, 0.0);
  switch (init) {
    case Init::kZeros:
      break;
    case Init::kOnes:
      std::fill(values.begin(), values.end(), 1.0);
      break;
    case Init::kUniformFanIn: {
      std::size_t fan_in = shape.front();
      if (shape.size() > 2) fan_in = n / shape.front();
      const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (auto& v : values) v = dist(rng);
      break;
    }
  }
  Tensor t = Tensor::from(std::move(shape), std::move(values), true);
  entries_.emplace(name, t);
  return t;
}

void ParamStore::insert(const std::string& name, Tensor tensor) {
  if (entries_.contains(name)) throw ConfigError("duplicate parameter name: " + name);
  tensor.set_requires_grad(true);
  entries_.emplace(name, std::move(tensor));
}

Tensor ParamStore::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError("unknown parameter: " + name);
  return it->second;
}

std::size_t ParamStore::element_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : entries_) n += t.numel();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [_, t] : entries_) t.zero_grad();
}

void ParamStore::assign_values(const ParamStore& other) {
  if (other.entries_.size() != entries_.size()) {
    throw IncompatibleCheckpointError(
        "parameter count mismatch: expected " + std::to_string(entries_.size()) +
        ", got " + std::to_string(other.entries_.size()));
  }
  for (auto& [name, t] : entries_) {
    auto it = other.entries_.find(name);
    if (it == other.entries_.end()) {
      throw IncompatibleCheckpointError("missing parameter: " + name);
    }
    if (it->second.shape() != t.shape()) {
      throw IncompatibleCheckpointError("shape mismatch for " + name + ": expected " +
                                        shape_string(t.shape()) + ", got " +
                                        shape_string(it->second.shape()));
    }
  }
  for (auto& [name, t] : entries_) {
    const auto src = other.entries_.at(name).data();
    std::copy(src.begin(), src.end(), t.mutable_data().begin());
  }
}

ParamStore ParamStore::clone() const {
  ParamStore out;
  for (const auto& [name, t] : entries_) {
    out.entries_.emplace(name, Tensor::from(t.shape(), {t.data().begin(), t.data().end()}, true));
  }
  return out;
}

namespace {

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
 public:
  Reader(std::vector<char> bytes, std::string path)
      : bytes_(std::move(bytes)), path_(std::move(path)) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }
  std::size_t size() const { return bytes_.size(); }

 private:
  void need(std::size_t n, const char* what) {
    if (pos_ + n > bytes_.size()) {
      throw FormatError(path_ + ": truncated " + what + " at byte offset " +
                        std::to_string(pos_) + " (need " + std::to_string(n) +
                        " bytes, have " + std::to_string(bytes_.size() - pos_) + ")");
    }
  }

  std::vector<char> bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParamStore& params,
                     const CheckpointMeta& meta) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path.string());
  os.write(kCheckpointMagic, sizeof(kCheckpointMagic) - 1);
  put<std::uint64_t>(os, meta.config_hash);
  put<std::uint32_t>(os, meta.epoch);
  put<double>(os, meta.dev_loss);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params.entries()) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) put<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    for (double v : t.data()) put<float>(os, static_cast<float>(v));
  }
  if (!os) throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  Reader r(std::move(bytes), path.string());

  const std::size_t magic_len = sizeof(kCheckpointMagic) - 1;
  if (r.bytes(magic_len, "magic") != std::string(kCheckpointMagic, magic_len)) {
    throw FormatError(path.string() + ": bad magic at byte offset 0");
  }
  Checkpoint ckpt;
  ckpt.meta.config_hash = r.get<std::uint64_t>("config hash");
  ckpt.meta.epoch = r.get<std::uint32_t>("epoch");
  ckpt.meta.dev_loss = r.get<double>("dev loss");
  const auto count = r.get<std::uint32_t>("tensor count");
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto name_len = r.get<std::uint32_t>("name length");
    std::string name = r.bytes(name_len, "name");
    const auto rank = r.get<std::uint32_t>("rank");
    if (rank == 0 || rank > 8) {
      throw FormatError(path.string() + ": implausible rank " + std::to_string(rank) +
                        " at byte offset " + std::to_string(r.pos() - 4));
    }
    Shape shape;
    for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(r.get<std::uint32_t>("dimension"));
    const std::size_t n = shape_numel(shape);
    std::vector<double> values(n);
    for (auto& v : values) v = static_cast<double>(r.get<float>("payload"));
    ckpt.params.insert(name, Tensor::from(std::move(shape), std::move(values), true));
  }
  if (r.pos() != r.size()) {
    throw FormatError(path.string() + ": trailing bytes at byte offset " + std::to_string(r.pos()));
  }
  return ckpt;
}

}  // namespace camel

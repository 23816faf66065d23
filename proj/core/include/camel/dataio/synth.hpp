#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "camel/dataio/manifest.hpp"

namespace camel {

struct SynthSpec {
  std::size_t n_utts = 200;
  std::size_t vocab_a_size = 30;  // CN role
  std::size_t vocab_b_size = 30;  // EN role
  std::size_t frames_per_token = 10;
  std::size_t feature_dim = 20;
  double noise_std = 0.1;
  double switch_prob = 0.3;
  std::size_t min_len = 2;
  std::size_t max_len = 8;

  void validate() const;
};

struct SynthCorpus {
  Vocabulary vocab;
  std::vector<Utterance> utterances;
};

/// Two pseudo-languages with one fixed Gaussian prototype per token. Each
/// utterance starts in a uniformly drawn language, switches language before
/// each subsequent token with probability `switch_prob`, and renders every
/// token as its prototype repeated `frames_per_token` times plus Gaussian
/// noise. Utterance i draws from its own stream seeded by (seed, i), and all
/// feature values are rounded to float32 so that they survive a file
/// round-trip unchanged.
SynthCorpus synth_corpus(const SynthSpec& spec, std::uint64_t seed);

/// Writes `feats/<id>.feat` files under `dir` and a manifest named
/// `manifest_name` that references them relatively.
void write_corpus(const std::filesystem::path& dir, const std::string& manifest_name,
                  const std::vector<Utterance>& utterances, const Vocabulary& vocab);

Manifest to_manifest(const std::vector<Utterance>& utterances, const Vocabulary& vocab);

}  // namespace camel

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "camel/dataio/features.hpp"
#include "camel/dataio/vocabulary.hpp"

namespace camel {

struct Utterance {
  std::string id;
  FeatureSequence features;
  std::vector<int> tokens;
  std::vector<Lang> langs;  // one per token
};

struct ManifestEntry {
  std::string id;
  std::string path;    // feature file, relative to the manifest's directory
  std::string tokens;  // space-separated token strings
  std::string langs;   // space-separated EN/CN tags
};

using Manifest = std::vector<ManifestEntry>;

// UTF-8 text, one tab-separated record per line: id, path, tokens, langs.
Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

std::vector<std::string> split_words(const std::string& text);

/// Resolves a manifest against `vocab`, loading every feature file relative
/// to `base_dir`. Validates id uniqueness, file existence, token/tag counts
/// and that each tag agrees with the vocabulary's classification.
std::vector<Utterance> load_utterances(const Manifest& manifest, const Vocabulary& vocab,
                                       const std::filesystem::path& base_dir);

std::vector<Utterance> load_corpus(const std::filesystem::path& manifest_path,
                                   const Vocabulary& vocab);

}  // namespace camel

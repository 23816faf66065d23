#include "camel/dataio/manifest.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "camel/errors.hpp"

namespace camel {

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string w; is >> w;) out.push_back(std::move(w));
  return out;
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest: " + path.string());
  Manifest out;
  std::unordered_set<std::string> ids;
  std::string line;
  for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 4) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected 4 fields, got " +
                        std::to_string(fields.size()));
    }
    if (!ids.insert(fields[0]).second) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": duplicate id '" +
                        fields[0] + "'");
    }
    out.push_back({fields[0], fields[1], fields[2], fields[3]});
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write manifest: " + path.string());
  for (const auto& e : manifest) {
    os << e.id << '\t' << e.path << '\t' << e.tokens << '\t' << e.langs << '\n';
  }
}

std::vector<Utterance> load_utterances(const Manifest& manifest, const Vocabulary& vocab,
                                       const std::filesystem::path& base_dir) {
  std::vector<Utterance> out;
  out.reserve(manifest.size());
  std::unordered_set<std::string> ids;
  for (const auto& e : manifest) {
    if (!ids.insert(e.id).second) throw FormatError("duplicate utterance id '" + e.id + "'");
    const auto feat_path = base_dir / e.path;
    if (!std::filesystem::exists(feat_path)) {
      throw IoError("utterance '" + e.id + "': missing feature file " + feat_path.string());
    }
    Utterance u;
    u.id = e.id;
    u.features = load_features(feat_path);
    const auto words = split_words(e.tokens);
    const auto tags = split_words(e.langs);
    if (words.size() != tags.size()) {
      throw FormatError("utterance '" + e.id + "': " + std::to_string(words.size()) +
                        " tokens but " + std::to_string(tags.size()) + " language tags");
    }
    for (std::size_t i = 0; i < words.size(); ++i) {
      const int id = vocab.id(words[i]);
      if (Vocabulary::is_reserved(id)) {
        throw InvalidTokenError("utterance '" + e.id + "': reserved token '" + words[i] + "'");
      }
      const Lang lang = parse_lang_tag(tags[i]);
      if (lang != vocab.language(id)) {
        throw FormatError("utterance '" + e.id + "': token '" + words[i] + "' tagged " +
                          tags[i] + " but belongs to " + lang_tag(vocab.language(id)));
      }
      u.tokens.push_back(id);
      u.langs.push_back(lang);
    }
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<Utterance> load_corpus(const std::filesystem::path& manifest_path,
                                   const Vocabulary& vocab) {
  return load_utterances(read_manifest(manifest_path), vocab, manifest_path.parent_path());
}

}  // namespace camel

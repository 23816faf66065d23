#include "camel/dataio/vocabulary.hpp"

#include <fstream>

#include "camel/errors.hpp"

namespace camel {

namespace {
const char* const kReservedNames[Vocabulary::kNumReserved] = {"<blank>", "<pad>", "<sos/eos>",
                                                              "<EN>", "<CN>"};
}  // namespace

const char* lang_tag(Lang lang) { return lang == Lang::kEn ? "EN" : "CN"; }

Lang parse_lang_tag(const std::string& tag) {
  if (tag == "EN") return Lang::kEn;
  if (tag == "CN") return Lang::kCn;
  throw FormatError("unknown language tag '" + tag + "' (expected EN or CN)");
}

Vocabulary::Vocabulary(std::vector<std::string> cn_tokens, std::vector<std::string> en_tokens)
    : cn_count_(cn_tokens.size()) {
  tokens_.assign(std::begin(kReservedNames), std::end(kReservedNames));
  tokens_.insert(tokens_.end(), cn_tokens.begin(), cn_tokens.end());
  tokens_.insert(tokens_.end(), en_tokens.begin(), en_tokens.end());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty() || tokens_[i].find_first_of(" \t\n") != std::string::npos) {
      throw FormatError("token " + std::to_string(i) + " is empty or contains whitespace");
    }
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw FormatError("duplicate token '" + tokens_[i] + "'");
    }
  }
}

const std::string& Vocabulary::token(int id) const {
  if (!is_valid(id)) throw InvalidTokenError("token id " + std::to_string(id) + " out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

int Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) throw InvalidTokenError("unknown token '" + token + "'");
  return it->second;
}

Lang Vocabulary::language(int id) const {
  if (!is_valid(id) || is_reserved(id)) {
    throw InvalidTokenError("token id " + std::to_string(id) + " has no language");
  }
  return static_cast<std::size_t>(id) < kNumReserved + cn_count_ ? Lang::kCn : Lang::kEn;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write vocabulary: " + path.string());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    os << tokens_[i];
    if (i >= kNumReserved) os << '\t' << lang_tag(language(static_cast<int>(i)));
    os << '\n';
  }
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open vocabulary: " + path.string());
  std::vector<std::string> cn, en;
  std::string line;
  std::size_t lineno = 0;
  for (; std::getline(is, line); ++lineno) {
    if (lineno < kNumReserved) {
      if (line != kReservedNames[lineno]) {
        throw FormatError(path.string() + ":" + std::to_string(lineno + 1) + ": expected '" +
                          kReservedNames[lineno] + "', found '" + line + "'");
      }
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw FormatError(path.string() + ":" + std::to_string(lineno + 1) +
                        ": missing language tag");
    }
    const Lang lang = parse_lang_tag(line.substr(tab + 1));
    if (lang == Lang::kCn && !en.empty()) {
      throw FormatError(path.string() + ":" + std::to_string(lineno + 1) +
                        ": CN tokens must precede EN tokens");
    }
    (lang == Lang::kCn ? cn : en).push_back(line.substr(0, tab));
  }
  if (lineno < kNumReserved) throw FormatError(path.string() + ": missing reserved tokens");
  return Vocabulary(std::move(cn), std::move(en));
}

}  // namespace camel

#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace camel {

// Language roles of the two vocab segments: kCn is the character-level
// ("Mandarin") role, kEn the word-piece ("English") role.
enum class Lang { kEn, kCn };

const char* lang_tag(Lang lang);
Lang parse_lang_tag(const std::string& tag);

/// Token inventory with a fixed reserved prefix:
///   0 <blank>, 1 <pad>, 2 <sos/eos>, 3 <EN>, 4 <CN>,
/// followed by the CN-role tokens and then the EN-role tokens. The <EN> and
/// <CN> ids are shared by language-wise CTC targets and LD-decoder inputs.
class Vocabulary {
 public:
  static constexpr int kBlank = 0;
  static constexpr int kPad = 1;
  static constexpr int kSosEos = 2;
  static constexpr int kLangEn = 3;
  static constexpr int kLangCn = 4;
  static constexpr int kNumReserved = 5;

  Vocabulary() = default;
  Vocabulary(std::vector<std::string> cn_tokens, std::vector<std::string> en_tokens);

  std::size_t size() const { return tokens_.size(); }
  std::size_t cn_count() const { return cn_count_; }
  std::size_t en_count() const { return size() - kNumReserved - cn_count_; }

  const std::string& token(int id) const;
  int id(const std::string& token) const;
  bool contains(const std::string& token) const { return index_.contains(token); }

  static bool is_reserved(int id) { return id >= 0 && id < kNumReserved; }
  bool is_valid(int id) const { return id >= 0 && static_cast<std::size_t>(id) < size(); }

  // Language of a non-reserved token; throws InvalidTokenError otherwise.
  Lang language(int id) const;
  static int lang_token(Lang lang) { return lang == Lang::kEn ? kLangEn : kLangCn; }

  // One token per line, index = line number; non-reserved lines carry a tab
  // and the language tag.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_ && cn_count_ == other.cn_count_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  std::size_t cn_count_ = 0;
};

}  // namespace camel

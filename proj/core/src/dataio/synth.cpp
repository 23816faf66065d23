#include "camel/dataio/synth.hpp"

#include <cstdio>
#include <random>

#include "camel/errors.hpp"

namespace camel {

namespace {

std::string utf8(char32_t cp) {
  std::string s;
  if (cp < 0x80) {
    s += static_cast<char>(cp);
  } else if (cp < 0x800) {
    s += static_cast<char>(0xC0 | (cp >> 6));
    s += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    s += static_cast<char>(0xE0 | (cp >> 12));
    s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    s += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return s;
}

// CJK ideographs for the character-role language.
std::string cn_name(std::size_t i) { return utf8(static_cast<char32_t>(0x4E00 + i)); }

// Consonant-vowel-consonant pseudo-words for the word-role language.
std::string en_name(std::size_t i) {
  static constexpr char kCons[] = "bdgklmnprst";
  static constexpr char kVow[] = "aeiou";
  std::string s;
  s += kCons[i % 11];
  s += kVow[(i / 11) % 5];
  s += kCons[(i / 55) % 11];
  if (i >= 605) s += std::to_string(i / 605);
  return s;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over (seed, index).
  std::uint64_t z = seed ^ (index + 0x9E3779B97F4A7C15ULL + (seed << 6) + (seed >> 2));
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

void SynthSpec::validate() const {
  if (n_utts == 0) throw ConfigError("synth: n_utts must be positive");
  if (vocab_a_size == 0 || vocab_b_size == 0) throw ConfigError("synth: vocab sizes must be positive");
  if (frames_per_token == 0) throw ConfigError("synth: frames_per_token must be positive");
  if (feature_dim < 1) throw ConfigError("synth: feature_dim must be at least 1");
  if (!(noise_std >= 0.0)) throw ConfigError("synth: noise_std must be non-negative");
  if (!(switch_prob >= 0.0 && switch_prob <= 1.0)) {
    throw ConfigError("synth: switch_prob must lie in [0,1]");
  }
  if (min_len == 0 || min_len > max_len) {
    throw ConfigError("synth: empty length range [" + std::to_string(min_len) + "," +
                      std::to_string(max_len) + "]");
  }
}

SynthCorpus synth_corpus(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::vector<std::string> cn, en;
  for (std::size_t i = 0; i < spec.vocab_a_size; ++i) cn.push_back(cn_name(i));
  for (std::size_t i = 0; i < spec.vocab_b_size; ++i) en.push_back(en_name(i));
  SynthCorpus corpus{Vocabulary(std::move(cn), std::move(en)), {}};
  const Vocabulary& vocab = corpus.vocab;

  // Prototype per token, indexed by vocab id.
  std::mt19937_64 proto_rng(mix_seed(seed, ~0ULL));
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> prototypes(vocab.size());
  for (std::size_t id = Vocabulary::kNumReserved; id < vocab.size(); ++id) {
    prototypes[id].resize(spec.feature_dim);
    for (auto& v : prototypes[id]) v = unit(proto_rng);
  }

  const int cn_begin = Vocabulary::kNumReserved;
  const int en_begin = cn_begin + static_cast<int>(spec.vocab_a_size);
  corpus.utterances.reserve(spec.n_utts);
  for (std::size_t u = 0; u < spec.n_utts; ++u) {
    std::mt19937_64 rng(mix_seed(seed, u));
    std::uniform_int_distribution<std::size_t> len_dist(spec.min_len, spec.max_len);
    std::bernoulli_distribution coin(0.5);
    std::bernoulli_distribution switch_coin(spec.switch_prob);
    std::uniform_int_distribution<int> pick_cn(0, static_cast<int>(spec.vocab_a_size) - 1);
    std::uniform_int_distribution<int> pick_en(0, static_cast<int>(spec.vocab_b_size) - 1);
    std::normal_distribution<double> noise(0.0, 1.0);

    Utterance utt;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "utt%06zu", u);
    utt.id = idbuf;
    const std::size_t len = len_dist(rng);
    Lang lang = coin(rng) ? Lang::kCn : Lang::kEn;
    for (std::size_t i = 0; i < len; ++i) {
      if (i > 0 && switch_coin(rng)) lang = lang == Lang::kCn ? Lang::kEn : Lang::kCn;
      const int tok = lang == Lang::kCn ? cn_begin + pick_cn(rng) : en_begin + pick_en(rng);
      utt.tokens.push_back(tok);
      utt.langs.push_back(lang);
    }

    const std::size_t T = len * spec.frames_per_token;
    std::vector<double> frames(T * spec.feature_dim);
    for (std::size_t t = 0; t < T; ++t) {
      const auto& proto = prototypes[static_cast<std::size_t>(utt.tokens[t / spec.frames_per_token])];
      for (std::size_t f = 0; f < spec.feature_dim; ++f) {
        const double v = proto[f] + spec.noise_std * noise(rng);
        frames[t * spec.feature_dim + f] = static_cast<double>(static_cast<float>(v));
      }
    }
    utt.features.frames = Tensor::from({T, spec.feature_dim}, std::move(frames));
    corpus.utterances.push_back(std::move(utt));
  }
  return corpus;
}

Manifest to_manifest(const std::vector<Utterance>& utterances, const Vocabulary& vocab) {
  Manifest out;
  out.reserve(utterances.size());
  for (const auto& u : utterances) {
    ManifestEntry e{u.id, "feats/" + u.id + ".feat", "", ""};
    for (std::size_t i = 0; i < u.tokens.size(); ++i) {
      if (i) {
        e.tokens += ' ';
        e.langs += ' ';
      }
      e.tokens += vocab.token(u.tokens[i]);
      e.langs += lang_tag(u.langs[i]);
    }
    out.push_back(std::move(e));
  }
  return out;
}

void write_corpus(const std::filesystem::path& dir, const std::string& manifest_name,
                  const std::vector<Utterance>& utterances, const Vocabulary& vocab) {
  std::filesystem::create_directories(dir / "feats");
  const Manifest manifest = to_manifest(utterances, vocab);
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    write_features(dir / manifest[i].path, utterances[i].features);
  }
  write_manifest(dir / manifest_name, manifest);
}

}  // namespace camel

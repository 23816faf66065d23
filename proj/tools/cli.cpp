#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "camel/dataio/language.hpp"
#include "camel/dataio/synth.hpp"
#include "camel/errors.hpp"
#include "camel/metrics/metrics.hpp"
#include "camel/numerics/grad_check.hpp"
#include "camel/training/model.hpp"
#include "camel/training/trainer.hpp"

namespace camel::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

Config load_config(const std::string& path) {
  return path.empty() ? Config{} : Config::load(path);
}

fs::path default_vocab(const std::string& explicit_path, const fs::path& manifest) {
  if (!explicit_path.empty()) return explicit_path;
  return manifest.parent_path() / "vocab.txt";
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw IoError(std::string(what) + " not found: " + p.string());
}

std::string join(const std::vector<std::string>& words) {
  std::string s;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) s += ' ';
    s += words[i];
  }
  return s;
}

// Builds the model described by `cfg` and loads `ckpt_path` into it.
std::unique_ptr<CamelModel> load_model(const ModelConfig& cfg, const fs::path& ckpt_path) {
  require_file(ckpt_path, "checkpoint");
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  if (ckpt.meta.config_hash != cfg.hash()) {
    throw IncompatibleCheckpointError(ckpt_path.string() + " was written for a different model (" +
                                      "variant " + variant_name(cfg.variant) +
                                      " does not match its config hash)");
  }
  auto model = std::make_unique<CamelModel>(cfg, 0);
  model->params().assign_values(ckpt.params);
  return model;
}

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
  std::optional<std::size_t> n_train;
  std::size_t n_dev = 50;
  std::size_t n_test = 50;
};

int do_synth(const SynthArgs& a, std::ostream& out) {
  const Config cfg = load_config(a.config);
  SynthSpec spec = cfg.synth;
  const std::size_t n_train = a.n_train.value_or(spec.n_utts);
  spec.n_utts = n_train + a.n_dev + a.n_test;
  const SynthCorpus corpus = synth_corpus(spec, a.seed);

  const auto first = corpus.utterances.begin();
  const std::vector<Utterance> train(first, first + static_cast<long>(n_train));
  const std::vector<Utterance> dev(first + static_cast<long>(n_train),
                                   first + static_cast<long>(n_train + a.n_dev));
  const std::vector<Utterance> test(first + static_cast<long>(n_train + a.n_dev),
                                    corpus.utterances.end());
  const fs::path dir = a.out;
  fs::create_directories(dir);
  corpus.vocab.save(dir / "vocab.txt");
  write_corpus(dir, "train.tsv", train, corpus.vocab);
  write_corpus(dir, "dev.tsv", dev, corpus.vocab);
  write_corpus(dir, "test.tsv", test, corpus.vocab);
  out << "wrote " << train.size() << " train, " << dev.size() << " dev, " << test.size()
      << " test utterances and a " << corpus.vocab.size() << "-entry vocabulary to "
      << dir.string() << '\n';
  return kOk;
}

// ---- train ---------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string train_manifest;
  std::string dev_manifest;
  std::string vocab;
  std::string out;
  std::string variant;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

int do_train(const TrainArgs& a, std::ostream& out) {
  Config cfg = load_config(a.config);
  if (!a.variant.empty()) cfg.model.variant = parse_variant(a.variant);
  if (a.epochs) cfg.train.epochs = *a.epochs;
  if (a.seed) cfg.train.seed = *a.seed;

  require_file(a.train_manifest, "training manifest");
  const Vocabulary vocab = Vocabulary::load(default_vocab(a.vocab, a.train_manifest));
  const auto train_set = load_corpus(a.train_manifest, vocab);
  std::vector<Utterance> dev_set;
  if (!a.dev_manifest.empty()) {
    require_file(a.dev_manifest, "dev manifest");
    dev_set = load_corpus(a.dev_manifest, vocab);
  }
  if (train_set.empty()) throw ConfigError("training manifest is empty");

  cfg.model.encoder.feature_dim = train_set.front().features.feature_dim();
  cfg.model.decoder.vocab_size = vocab.size();
  cfg.model.apply_variant();

  const fs::path dir = a.out;
  fs::create_directories(dir);
  cfg.save(dir / "config.ini");
  CamelModel model(cfg.model, cfg.train.seed);
  const auto log = train(model, cfg.train, cfg.loss, train_set, dev_set, vocab, dir,
                         [&](const EpochRecord& r) {
                           if (a.quiet) return;
                           char line[128];
                           std::snprintf(line, sizeof(line),
                                         "epoch %3zu  train %.4f  dev %.4f\n", r.epoch,
                                         r.train_loss, r.dev_loss);
                           out << line << std::flush;
                         });
  out << "trained " << variant_name(cfg.model.variant) << " for " << log.size()
      << " epochs; checkpoints in " << dir.string() << '\n';
  return kOk;
}

// ---- decode --------------------------------------------------------------

struct DecodeArgs {
  std::string config;
  std::string checkpoint;
  std::string manifest;
  std::string vocab;
  std::string out;
  std::string variant;
  std::size_t beam = 10;
  double ctc_weight = 0.5;
  bool length_normalize = false;
};

int do_decode(const DecodeArgs& a, std::ostream& out) {
  const fs::path ckpt = a.checkpoint;
  const fs::path config_path =
      a.config.empty() ? ckpt.parent_path() / "config.ini" : fs::path(a.config);
  require_file(config_path, "config");
  Config cfg = Config::load(config_path);
  if (!a.variant.empty()) {
    cfg.model.variant = parse_variant(a.variant);
    cfg.model.apply_variant();
  }
  if (a.beam == 0) throw UsageError("--beam must be positive");

  require_file(a.manifest, "manifest");
  const Vocabulary vocab = Vocabulary::load(default_vocab(a.vocab, a.manifest));
  const auto utts = load_corpus(a.manifest, vocab);
  const auto model = load_model(cfg.model, ckpt);

  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out, std::ios::trunc);
    if (!file) throw IoError("cannot write " + a.out);
  }
  std::ostream& os = a.out.empty() ? out : file;
  const RescoreOptions opts{a.ctc_weight, a.length_normalize};
  for (const auto& u : utts) {
    const DecodeResult r = model->decode(u.features.frames, vocab, a.beam, opts);
    const auto& best = r.best_hypothesis().tokens;
    std::vector<std::string> toks, langs;
    for (int t : best) toks.push_back(vocab.token(t));
    for (Lang l : languages_of(best, vocab)) langs.push_back(lang_tag(l));
    char score[64];
    std::snprintf(score, sizeof(score), "%.6f", r.combined_score);
    os << u.id << '\t' << join(toks) << '\t' << join(langs) << '\t' << score << '\n';
  }
  if (!a.out.empty() && !file) throw IoError("failed writing " + a.out);
  return kOk;
}

// ---- score ---------------------------------------------------------------

struct ScoreArgs {
  std::string config;
  std::string ref;
  std::string hyp;
  std::string out;
  bool verbose = false;
};

struct TaggedTokens {
  std::vector<std::string> tokens;
  std::vector<Lang> langs;
};

TaggedTokens tagged(const std::string& tokens, const std::string& langs, const std::string& where) {
  TaggedTokens t{split_words(tokens), {}};
  for (const auto& tag : split_words(langs)) t.langs.push_back(parse_lang_tag(tag));
  if (t.tokens.size() != t.langs.size()) {
    throw FormatError(where + ": " + std::to_string(t.tokens.size()) + " tokens but " +
                      std::to_string(t.langs.size()) + " language tags");
  }
  return t;
}

int do_score(const ScoreArgs& a, std::ostream& out) {
  require_file(a.ref, "reference manifest");
  require_file(a.hyp, "hypothesis file");
  const Manifest ref = read_manifest(a.ref);

  std::unordered_map<std::string, TaggedTokens> hyps;
  std::ifstream is(a.hyp);
  if (!is) throw IoError("cannot open " + a.hyp);
  std::string line;
  for (std::size_t n = 1; std::getline(is, line); ++n) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string field; std::getline(ss, field, '\t');) f.push_back(field);
    while (f.size() < 4 && line.back() == '\t') f.emplace_back();
    const std::string where = a.hyp + ":" + std::to_string(n);
    if (f.size() != 4) throw FormatError(where + ": expected 4 tab-separated fields");
    if (!hyps.emplace(f[0], tagged(f[1], f[2], where)).second) {
      throw FormatError(where + ": duplicate utterance id " + f[0]);
    }
  }

  // Token strings are interned locally, so scoring needs no vocabulary.
  std::unordered_map<std::string, int> ids;
  auto intern = [&](const std::vector<std::string>& words) {
    std::vector<int> v;
    for (const auto& w : words) v.push_back(ids.emplace(w, static_cast<int>(ids.size())).first->second);
    return v;
  };
  std::vector<UtteranceScore> scores;
  for (const auto& e : ref) {
    auto it = hyps.find(e.id);
    if (it == hyps.end()) throw FormatError(a.hyp + ": no hypothesis for utterance " + e.id);
    const TaggedTokens r = tagged(e.tokens, e.langs, a.ref + " (" + e.id + ")");
    const auto ref_ids = intern(r.tokens);
    const auto hyp_ids = intern(it->second.tokens);
    scores.push_back({e.id, count_errors(ref_ids, r.langs, hyp_ids, it->second.langs)});
  }
  const std::string report = format_report(fs::path(a.ref).filename().string(), scores, a.verbose);
  if (a.out.empty()) {
    out << report;
  } else {
    std::ofstream os(a.out, std::ios::trunc);
    if (!(os << report)) throw IoError("cannot write " + a.out);
  }
  return kOk;
}

// ---- gradcheck -----------------------------------------------------------

struct GradcheckArgs {
  std::string config;
  std::string variant;
  std::uint64_t seed = 1;
  std::size_t max_elements = 4;
  double tolerance = 1e-4;
};

int do_gradcheck(const GradcheckArgs& a, std::ostream& out, std::ostream& err) {
  Config cfg = load_config(a.config);
  if (!a.variant.empty()) cfg.model.variant = parse_variant(a.variant);
  SynthSpec spec = cfg.synth;
  spec.n_utts = 1;
  spec.min_len = 2;
  spec.max_len = 3;
  spec.feature_dim = cfg.model.encoder.feature_dim;
  const SynthCorpus corpus = synth_corpus(spec, a.seed);
  cfg.model.decoder.vocab_size = corpus.vocab.size();
  cfg.model.apply_variant();

  CamelModel model(cfg.model, a.seed);
  const Utterance& u = corpus.utterances.front();
  GradCheckOptions opts;
  opts.max_elements_per_tensor = a.max_elements;
  opts.tolerance = a.tolerance;
  opts.seed = a.seed;
  const GradCheckReport rep = grad_check(
      [&] { return model.loss(u, corpus.vocab, cfg.loss).total; }, model.params(), opts);
  out << "variant " << variant_name(cfg.model.variant) << '\n'
      << "elements_checked " << rep.elements_checked << '\n'
      << "kinks_skipped " << rep.kinks_skipped << '\n'
      << "max_relative_error " << rep.max_relative_error << '\n'
      << "worst " << rep.worst_parameter << '[' << rep.worst_index << "]\n"
      << "result " << (rep.passed ? "pass" : "fail") << '\n';
  if (rep.passed) return kOk;
  err << "camel: gradient check failed"
      << (rep.diagnostic.empty() ? "" : ": " + rep.diagnostic) << '\n';
  return kCheckFailed;
}

// ---- avg-ckpt ------------------------------------------------------------

struct AvgArgs {
  std::string config;
  std::string dir;
  std::string out;
  std::optional<std::size_t> k;
};

int do_avg(const AvgArgs& a, std::ostream& out) {
  const Config cfg = load_config(a.config);
  const std::size_t k = a.k.value_or(cfg.train.average_last_k);
  if (!fs::is_directory(a.dir)) throw IoError("checkpoint directory not found: " + a.dir);
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(a.dir)) {
    const std::string name = e.path().filename().string();
    if (name.starts_with("epoch_") && name.ends_with(".ckpt")) paths.push_back(e.path());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw IoError("no epoch_*.ckpt files in " + a.dir);
  const Checkpoint avg = average_checkpoints(paths, k);
  save_checkpoint(a.out, avg.params, avg.meta);
  out << "averaged " << k << " of " << paths.size() << " checkpoints into " << a.out << '\n';
  return kOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return kUsage;
  if (dynamic_cast<const IoError*>(&e)) return kIo;
  if (dynamic_cast<const IncompatibleCheckpointError*>(&e)) return kIncompatible;
  if (dynamic_cast<const FormatError*>(&e)) return kFormat;
  if (dynamic_cast<const ConfigError*>(&e)) return kConfig;
  if (dynamic_cast<const TrainingDivergedError*>(&e)) return kDiverged;
  if (dynamic_cast<const Error*>(&e)) return kData;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kIo;
  return kFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"camel: code-switching ASR toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic two-language corpus");
  synth->add_option("--config", sa.config, "Config file ([synth] section is used)")
      ->check(CLI::ExistingFile);
  synth->add_option("--out", sa.out, "Output directory")->required();
  synth->add_option("--seed", sa.seed, "Corpus seed")->capture_default_str();
  synth->add_option("--n-train", sa.n_train, "Training utterances (default: synth.n_utts)");
  synth->add_option("--n-dev", sa.n_dev, "Dev utterances")->capture_default_str();
  synth->add_option("--n-test", sa.n_test, "Test utterances")->capture_default_str();

  TrainArgs ta;
  auto* trn = app.add_subcommand("train", "Train a model and write per-epoch checkpoints");
  trn->add_option("--config", ta.config, "Config file")->check(CLI::ExistingFile);
  trn->add_option("--train", ta.train_manifest, "Training manifest")->required();
  trn->add_option("--dev", ta.dev_manifest, "Dev manifest (default: training set)");
  trn->add_option("--vocab", ta.vocab, "Vocabulary (default: vocab.txt next to the manifest)");
  trn->add_option("--out", ta.out, "Output directory")->required();
  trn->add_option("--variant", ta.variant, "baseline|s1|s2|s3|camel (overrides config)");
  trn->add_option("--epochs", ta.epochs, "Epochs (overrides config)");
  trn->add_option("--seed", ta.seed, "Seed (overrides config)");
  trn->add_flag("--quiet", ta.quiet, "No per-epoch progress lines");

  DecodeArgs da;
  auto* dec = app.add_subcommand("decode", "Decode a manifest with CTC beam search and rescoring");
  dec->add_option("--config", da.config, "Config file (default: config.ini next to the checkpoint)");
  dec->add_option("--checkpoint", da.checkpoint, "Checkpoint")->required();
  dec->add_option("--manifest", da.manifest, "Manifest to decode")->required();
  dec->add_option("--vocab", da.vocab, "Vocabulary (default: vocab.txt next to the manifest)");
  dec->add_option("--out", da.out, "Hypothesis file (default: stdout)");
  dec->add_option("--variant", da.variant, "Model variant (overrides config)");
  dec->add_option("--beam", da.beam, "CTC prefix beam width")->capture_default_str();
  dec->add_option("--ctc-weight", da.ctc_weight, "CTC weight in rescoring")->capture_default_str();
  dec->add_flag("--length-normalize", da.length_normalize, "Length-normalize attention scores");

  ScoreArgs sc;
  auto* scr = app.add_subcommand("score", "Score a hypothesis file against a manifest");
  scr->add_option("--config", sc.config, "Config file (accepted for uniformity)")
      ->check(CLI::ExistingFile);
  scr->add_option("--ref", sc.ref, "Reference manifest")->required();
  scr->add_option("--hyp", sc.hyp, "Hypothesis file from decode")->required();
  scr->add_option("--out", sc.out, "Report file (default: stdout)");
  scr->add_flag("--verbose", sc.verbose, "Per-utterance breakdown");

  GradcheckArgs ga;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the composite loss");
  gc->add_option("--config", ga.config, "Config file")->check(CLI::ExistingFile);
  gc->add_option("--variant", ga.variant, "Model variant (overrides config)");
  gc->add_option("--seed", ga.seed, "Seed")->capture_default_str();
  gc->add_option("--max-elements", ga.max_elements, "Sampled elements per tensor")
      ->capture_default_str();
  gc->add_option("--tolerance", ga.tolerance, "Max relative error")->capture_default_str();

  AvgArgs aa;
  auto* avg = app.add_subcommand("avg-ckpt", "Average the k lowest-dev-loss checkpoints");
  avg->add_option("--config", aa.config, "Config file (train.average_last_k)")
      ->check(CLI::ExistingFile);
  avg->add_option("--dir", aa.dir, "Directory holding epoch_*.ckpt")->required();
  avg->add_option("--k", aa.k, "Checkpoints to average (default: train.average_last_k)");
  avg->add_option("--out", aa.out, "Output checkpoint")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    const bool missing_file = e.get_name() == "ValidationError" &&
                              std::string(e.what()).find("does not exist") != std::string::npos;
    err << "camel: " << e.what() << '\n';
    return missing_file ? kIo : kUsage;
  }

  try {
    if (*synth) return do_synth(sa, out);
    if (*trn) return do_train(ta, out);
    if (*dec) return do_decode(da, out);
    if (*scr) return do_score(sc, out);
    if (*gc) return do_gradcheck(ga, out, err);
    if (*avg) return do_avg(aa, out);
  } catch (const std::exception& e) {
    err << "camel: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kUsage;
}

}  // namespace camel::cli

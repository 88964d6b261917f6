// cvp: concept-vector projection pipeline.
//
//   cvp split    --corpus C --out RUN [--fraction 0.4] [--seed S]
//   cvp fit      --corpus C --embeddings E --out RUN [--split RUN]
//   cvp score    --vector RUN/concept_vector.cvpv --embeddings E --out RUN
//   cvp evaluate --corpus C --scores RUN/scores.tsv --out RUN [--split RUN]
//   cvp compare  --corpus C --scorer name=path ... --out RUN
//   cvp arc      --corpus C --scores RUN/scores.tsv --out RUN
//
// Exit codes: 0 ok, 1 usage or configuration error, 2 bad input data,
// 3 internal error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cvp/analysis.hpp"
#include "cvp/baselines.hpp"
#include "cvp/corpus.hpp"
#include "cvp/error.hpp"
#include "cvp/evaluation.hpp"
#include "cvp/geometry.hpp"
#include "cvp/providers.hpp"
#include "cvp/text/dsv.hpp"
#include "cvp/text/format.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUser = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

// --- shared options ----------------------------------------------------------

struct CorpusOptions {
  std::string path;
  std::string columns;
  std::string format = "auto";
  double scale_min = 1.0;
  double scale_max = 9.0;
  double lower = 3.0;
  double upper = 7.0;
  bool no_thresholds = false;
  bool allow_malformed = false;
};

void add_corpus_options(CLI::App* cmd, CorpusOptions& o, bool required) {
  auto* opt = cmd->add_option("--corpus", o.path, "Annotated corpus (.tsv, .csv or .jsonl)")
                  ->check(CLI::ExistingFile);
  if (required) opt->required();
  cmd->add_option("--columns", o.columns, "JSON file mapping fields to column names")->check(CLI::ExistingFile);
  cmd->add_option("--format", o.format, "Corpus format")
      ->check(CLI::IsMember({"auto", "tsv", "csv", "jsonl"}))
      ->capture_default_str();
  cmd->add_option("--scale-min", o.scale_min, "Lowest rating on the scale")->capture_default_str();
  cmd->add_option("--scale-max", o.scale_max, "Highest rating on the scale")->capture_default_str();
  cmd->add_option("--lower", o.lower, "Ratings <= lower are negative")->capture_default_str();
  cmd->add_option("--upper", o.upper, "Ratings >= upper are positive")->capture_default_str();
  cmd->add_flag("--no-thresholds", o.no_thresholds, "Use ratings as continuous gold only (no labels)");
  cmd->add_flag("--allow-malformed", o.allow_malformed, "Skip malformed rows with a warning");
}

struct DiagnosticOptions {
  std::vector<std::string> slice_by;
  double zero_eps = 0.02;
  double extreme_eps = 0.02;
  std::size_t bins = 50;
  std::string alpha_level = "interval";
};

void add_diagnostic_options(CLI::App* cmd, DiagnosticOptions& o) {
  cmd->add_option("--slice-by", o.slice_by, "Tag keys to slice by (genre, language, source)")
      ->check(CLI::IsMember({"genre", "language", "source"}))
      ->delimiter(',');
  cmd->add_option("--zero-eps", o.zero_eps, "Zero zone, as a fraction of the score range")->capture_default_str();
  cmd->add_option("--extreme-eps", o.extreme_eps, "Extreme zones, as a fraction of the score range")
      ->capture_default_str();
  cmd->add_option("--bins", o.bins, "Histogram bins")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--alpha-level", o.alpha_level, "Krippendorff alpha level")
      ->check(CLI::IsMember({"interval", "ordinal"}))
      ->capture_default_str();
}

struct LeakageOptions {
  std::string split_dir;
  std::string ids;
  bool allow_leakage = false;
};

void add_leakage_options(CLI::App* cmd, LeakageOptions& o) {
  cmd->add_option("--split", o.split_dir, "Run directory holding concept_ids.txt; those ids may not be evaluated")
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--ids", o.ids, "Only evaluate the ids listed in this file")->check(CLI::ExistingFile);
  cmd->add_flag("--allow-leakage", o.allow_leakage, "Evaluate concept ids anyway and watermark the report");
}

struct EncoderOptions {
  std::string embeddings;
  std::string url;
  std::string name;
  std::size_t batch_size = 32;
  std::size_t max_attempts = 3;
  std::size_t parallel = 1;
};

void add_encoder_options(CLI::App* cmd, EncoderOptions& o) {
  cmd->add_option("--embeddings", o.embeddings, "Embedding file (binary or JSON lines)")->check(CLI::ExistingFile);
  cmd->add_option("--encoder-url", o.url, "Encoding service URL (default: $CVP_ENCODER_URL)");
  cmd->add_option("--encoder-name", o.name, "Encoder name recorded for service embeddings");
  cmd->add_option("--batch-size", o.batch_size, "Sentences per service request")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-attempts", o.max_attempts, "Attempts per service request")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--parallel", o.parallel, "Service requests in flight")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

// --- helpers -----------------------------------------------------------------

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

cvp::CorpusFormatSpec corpus_spec(const CorpusOptions& o) {
  auto spec = cvp::CorpusFormatSpec::for_path(o.path);
  if (o.format == "tsv") {
    spec.format = cvp::CorpusFormat::Delimited;
    spec.delimiter = '\t';
  } else if (o.format == "csv") {
    spec.format = cvp::CorpusFormat::Delimited;
    spec.delimiter = ',';
  } else if (o.format == "jsonl") {
    spec.format = cvp::CorpusFormat::JsonLines;
  }
  if (!o.columns.empty()) spec.columns = cvp::ColumnMap::from_file(o.columns);
  spec.scale.min = o.scale_min;
  spec.scale.max = o.scale_max;
  if (o.no_thresholds) {
    spec.scale.lower.reset();
    spec.scale.upper.reset();
  } else {
    spec.scale.lower = o.lower;
    spec.scale.upper = o.upper;
  }
  spec.scale.validate();
  return spec;
}

std::vector<cvp::LabeledSentence> load_corpus(const CorpusOptions& o) {
  auto parsed = cvp::read_corpus(o.path, corpus_spec(o));
  if (!parsed.errors.empty()) {
    const std::size_t shown = std::min<std::size_t>(parsed.errors.size(), 5);
    std::ostringstream msg;
    msg << o.path << ": " << parsed.errors.size() << " malformed row(s)";
    for (std::size_t i = 0; i < shown; ++i) {
      msg << "\n  row " << parsed.errors[i].row << ": " << parsed.errors[i].message;
    }
    if (!o.allow_malformed) {
      throw cvp::Error(cvp::ErrorKind::Malformed, msg.str() + "\n(use --allow-malformed to skip them)");
    }
    warn(msg.str());
  }
  return std::move(parsed.sentences);
}

std::vector<std::string> read_id_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw cvp::Error(cvp::ErrorKind::Io, "cannot open id list " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    const auto id = cvp::text::trim(line);
    if (!id.empty()) ids.emplace_back(id);
  }
  return ids;
}

void write_id_list(const fs::path& path, const std::vector<std::string>& ids) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw cvp::Error(cvp::ErrorKind::Io, "cannot write " + path.string());
  for (const auto& id : ids) out << id << '\n';
}

std::unordered_set<std::string> concept_ids_from(const std::string& split_dir) {
  const fs::path file = fs::path(split_dir) / "concept_ids.txt";
  if (!fs::exists(file)) throw cvp::Error(cvp::ErrorKind::Io, "no concept_ids.txt in " + split_dir);
  const auto ids = read_id_list(file);
  return {ids.begin(), ids.end()};
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw cvp::Error(cvp::ErrorKind::Io, "cannot write " + path.string());
  return out;
}

std::string file_safe(std::string_view name) {
  std::string out(name);
  for (char& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return out.empty() ? "scorer" : out;
}

// The run directory and the manifest every command writes into it.
class Run {
 public:
  Run(std::string command, const CLI::App* cmd, const std::string& out_dir, std::uint64_t seed)
      : command_(std::move(command)), dir_(out_dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw cvp::Error(cvp::ErrorKind::Io, "cannot create run directory " + out_dir);
    manifest_["command"] = command_;
    manifest_["seed"] = seed;
    manifest_["arguments"] = arguments(cmd);
  }

  fs::path path(const std::string& name) const { return dir_ / name; }
  ordered_json& manifest() { return manifest_; }

  void finish() {
    auto out = open_output(path(command_ + ".manifest.json"));
    out << manifest_.dump(2) << '\n';
  }

 private:
  // Resolved option values, excluding the output location. Paths inside the
  // run directory are recorded relative to it so manifests do not depend on
  // where the run lives.
  ordered_json arguments(const CLI::App* cmd) const {
    std::map<std::string, ordered_json> sorted;
    for (const CLI::Option* opt : cmd->get_options()) {
      const std::string name = opt->get_single_name();
      if (name == "help" || name == "out" || name == "config" || name.empty()) continue;
      std::vector<std::string> values = opt->results();
      if (values.empty()) {
        const std::string def = opt->get_default_str();
        if (def.empty()) continue;
        values.push_back(def);
      }
      for (auto& v : values) v = relativize(v);
      if (opt->get_expected_max() > 1) {
        sorted[name] = values;
      } else if (opt->get_type_size() == 0) {
        sorted[name] = opt->as<bool>();
      } else {
        sorted[name] = values.back();
      }
    }
    ordered_json out = ordered_json::object();
    for (auto& [k, v] : sorted) out[k] = std::move(v);
    return out;
  }

  std::string relativize(const std::string& value) const {
    std::error_code ec;
    if (value.empty() || !fs::exists(value, ec)) return value;
    const fs::path abs = fs::weakly_canonical(value, ec);
    const fs::path root = fs::weakly_canonical(dir_, ec);
    if (ec) return value;
    const fs::path rel = abs.lexically_relative(root);
    if (rel.empty() || *rel.begin() == "..") return value;
    return rel.generic_string() == "." ? std::string(".") : rel.generic_string();
  }

  std::string command_;
  fs::path dir_;
  ordered_json manifest_;
};

// Embeddings from a file, or from the encoding service for the given sentences.
struct LoadedEmbeddings {
  std::vector<cvp::EmbeddingRecord> records;
  std::string encoder;
};

LoadedEmbeddings load_embeddings(const EncoderOptions& o, const std::vector<const cvp::LabeledSentence*>& wanted) {
  if (!o.embeddings.empty()) {
    auto set = cvp::read_embeddings(fs::path(o.embeddings));
    return {std::move(set.records), set.header.encoder_name};
  }
  std::optional<cvp::EncoderEndpoint> ep;
  if (!o.url.empty()) {
    ep.emplace();
    ep->url = o.url;
  } else {
    ep = cvp::EncoderEndpoint::from_env();
  }
  if (!ep) {
    throw cvp::Error(cvp::ErrorKind::InvalidArgument,
                     "no embeddings: pass --embeddings, --encoder-url, or set CVP_ENCODER_URL");
  }
  ep->batch_size = o.batch_size;
  ep->max_attempts = o.max_attempts;
  ep->max_parallel = o.parallel;
  std::vector<cvp::SentenceText> texts;
  texts.reserve(wanted.size());
  for (const auto* s : wanted) texts.push_back({s->id, s->text});
  return {cvp::request_embeddings(texts, *ep), o.name.empty() ? ep->url : o.name};
}

// Encoder recorded by `cvp score` next to a score file, if any.
std::string encoder_beside(const fs::path& scores_path) {
  const fs::path manifest = scores_path.parent_path() / "score.manifest.json";
  std::ifstream in(manifest);
  if (!in) return {};
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.contains("scores") && j["scores"].is_string() &&
        j["scores"].get<std::string>() != scores_path.filename().string()) {
      return {};
    }
    return j.value("encoder", std::string());
  } catch (const nlohmann::json::exception&) {
    return {};
  }
}

cvp::EvaluationOptions evaluation_options(const DiagnosticOptions& d, const LeakageOptions& l) {
  cvp::EvaluationOptions opts;
  opts.slice_keys = d.slice_by;
  opts.diagnostics.zero_eps = d.zero_eps;
  opts.diagnostics.extreme_eps = d.extreme_eps;
  opts.diagnostics.n_bins = d.bins;
  opts.alpha_level = d.alpha_level == "ordinal" ? cvp::AlphaLevel::Ordinal : cvp::AlphaLevel::Interval;
  if (!l.ids.empty()) {
    const auto ids = read_id_list(l.ids);
    opts.restrict_to.emplace(ids.begin(), ids.end());
  }
  if (!l.split_dir.empty()) opts.concept_ids = concept_ids_from(l.split_dir);
  opts.allow_leakage = l.allow_leakage;
  return opts;
}

void write_scores_tsv(const fs::path& path, const cvp::ScoreSet& scores) {
  auto out = open_output(path);
  cvp::text::write_row(out, {"id", "score"}, '\t');
  for (const auto& e : scores.entries) cvp::text::write_row(out, {e.id, cvp::text::format_double(e.score)}, '\t');
}

// --- commands ----------------------------------------------------------------

struct Global {
  std::string out;
  std::uint64_t seed = 0;
};

struct SplitCmd {
  CorpusOptions corpus;
  double fraction = 0.4;
  std::vector<std::string> stratify_by;

  void add(CLI::App* cmd) {
    add_corpus_options(cmd, corpus, true);
    cmd->add_option("--fraction", fraction, "Share of each class sent to the concept corpus")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--stratify-by", stratify_by, "Tag keys to stratify by")
        ->check(CLI::IsMember({"genre", "language", "source"}))
        ->delimiter(',');
  }

  void run(const CLI::App* cmd, const Global& g) {
    const auto sentences = load_corpus(corpus);
    cvp::SplitSpec spec;
    spec.concept_fraction = fraction;
    spec.seed = g.seed;
    spec.stratify_by = stratify_by;
    const auto result = cvp::split_concept_test(sentences, spec);

    Run r("split", cmd, g.out, g.seed);
    std::vector<std::string> concept_ids, test_ids;
    std::size_t pos = 0, neg = 0;
    for (const auto& s : result.concept_corpus) {
      concept_ids.push_back(s.id);
      (s.label == cvp::Label::Positive ? pos : neg) += 1;
    }
    std::map<std::string, std::size_t> test_by_label;
    for (const auto& s : result.test_set) {
      test_ids.push_back(s.id);
      ++test_by_label[std::string(cvp::to_string(s.label))];
    }
    write_id_list(r.path("concept_ids.txt"), concept_ids);
    write_id_list(r.path("test_ids.txt"), test_ids);
    for (const auto& w : result.warnings) warn(w);

    auto& m = r.manifest();
    m["fraction"] = fraction;
    m["counts"] = {{"sentences", sentences.size()},
                   {"concept_positive", pos},
                   {"concept_negative", neg},
                   {"test", test_ids.size()},
                   {"test_by_label", test_by_label}};
    m["warnings"] = result.warnings;
    r.finish();
    std::cout << "concept corpus: " << pos << " positive, " << neg << " negative; test set: " << test_ids.size()
              << '\n';
  }
};

struct FitCmd {
  CorpusOptions corpus;
  EncoderOptions encoder;
  std::string split_dir;

  void add(CLI::App* cmd) {
    add_corpus_options(cmd, corpus, true);
    add_encoder_options(cmd, encoder);
    cmd->add_option("--split", split_dir, "Run directory holding concept_ids.txt (default: every labelled sentence)")
        ->check(CLI::ExistingDirectory);
  }

  void run(const CLI::App* cmd, const Global& g) {
    const auto sentences = load_corpus(corpus);
    std::optional<std::unordered_set<std::string>> concept_ids;
    if (!split_dir.empty()) concept_ids = concept_ids_from(split_dir);

    std::vector<cvp::LabeledSentence> exemplars;
    std::vector<const cvp::LabeledSentence*> wanted;
    for (const auto& s : sentences) {
      if (s.label != cvp::Label::Positive && s.label != cvp::Label::Negative) continue;
      if (concept_ids && !concept_ids->count(s.id)) continue;
      exemplars.push_back(s);
    }
    for (const auto& s : exemplars) wanted.push_back(&s);
    if (concept_ids && exemplars.size() != concept_ids->size()) {
      warn(std::to_string(concept_ids->size() - std::min(concept_ids->size(), exemplars.size())) +
           " concept ids are not labelled positive or negative in the corpus");
    }

    const auto emb = load_embeddings(encoder, wanted);
    const auto alignment = cvp::align(exemplars, emb.records);
    if (!alignment.missing_corpus.empty()) {
      warn(std::to_string(alignment.missing_corpus.size()) + " exemplar(s) have no embedding and are left out");
    }
    std::vector<cvp::EmbeddingRecord> pos, neg;
    for (const auto& p : alignment.pairs) {
      auto& bucket = exemplars[p.sentence].label == cvp::Label::Positive ? pos : neg;
      bucket.push_back(emb.records[p.embedding]);
    }
    if (pos.empty()) throw cvp::Error(cvp::ErrorKind::EmptyClass, "no positive exemplars with embeddings");
    if (neg.empty()) throw cvp::Error(cvp::ErrorKind::EmptyClass, "no negative exemplars with embeddings");
    const auto cv = cvp::fit_concept_vector(pos, neg);

    Run r("fit", cmd, g.out, g.seed);
    cvp::write_concept_vector(r.path("concept_vector.cvpv"), cv, emb.encoder);
    auto& m = r.manifest();
    m["encoder"] = emb.encoder;
    m["dimension"] = cv.dimension();
    m["n_positive"] = cv.n_positive_exemplars();
    m["n_negative"] = cv.n_negative_exemplars();
    m["separation"] = cv.separation();
    m["exemplars_without_embedding"] = alignment.missing_corpus.size();
    r.finish();
    std::cout << "fitted on " << pos.size() << " positive and " << neg.size()
              << " negative exemplars; separation " << cvp::text::format_double(cv.separation()) << '\n';
  }
};

struct ScoreCmd {
  CorpusOptions corpus;
  EncoderOptions encoder;
  std::string vector;
  std::string lexicon;
  std::string ids;
  std::string name;

  void add(CLI::App* cmd) {
    add_corpus_options(cmd, corpus, false);
    add_encoder_options(cmd, encoder);
    auto* v = cmd->add_option("--vector", vector, "Concept vector file from `cvp fit`")->check(CLI::ExistingFile);
    auto* l = cmd->add_option("--lexicon", lexicon, "Score with a lexicon instead")->check(CLI::ExistingFile);
    v->excludes(l);
    cmd->add_option("--ids", ids, "Only score the ids listed in this file")->check(CLI::ExistingFile);
    cmd->add_option("--name", name, "Scorer name (default: projection or lexicon)");
  }

  void run(const CLI::App* cmd, const Global& g) {
    if (vector.empty() && lexicon.empty()) {
      throw cvp::Error(cvp::ErrorKind::InvalidArgument, "score needs --vector or --lexicon");
    }
    std::optional<std::unordered_set<std::string>> keep;
    if (!ids.empty()) {
      const auto list = read_id_list(ids);
      keep.emplace(list.begin(), list.end());
    }
    std::vector<cvp::LabeledSentence> sentences;
    if (!corpus.path.empty()) {
      for (auto& s : load_corpus(corpus)) {
        if (!keep || keep->count(s.id)) sentences.push_back(std::move(s));
      }
    }

    Run r("score", cmd, g.out, g.seed);
    cvp::ScoreSet scores;
    std::string encoder_name;
    std::size_t n_missing = 0;
    if (!lexicon.empty()) {
      if (corpus.path.empty()) throw cvp::Error(cvp::ErrorKind::InvalidArgument, "--lexicon needs --corpus");
      const auto lex = cvp::Lexicon::load(fs::path(lexicon));
      scores.scorer_name = name.empty() ? "lexicon" : name;
      for (const auto& s : sentences) scores.entries.push_back({s.id, cvp::lexicon_score(s.text, lex)});
    } else {
      const auto stored = cvp::read_concept_vector(fs::path(vector));
      std::vector<const cvp::LabeledSentence*> wanted;
      for (const auto& s : sentences) wanted.push_back(&s);
      if (encoder.embeddings.empty() && corpus.path.empty()) {
        throw cvp::Error(cvp::ErrorKind::InvalidArgument, "scoring through the encoding service needs --corpus");
      }
      auto emb = load_embeddings(encoder, wanted);
      encoder_name = emb.encoder;
      if (!stored.encoder_name.empty() && !emb.encoder.empty() && stored.encoder_name != emb.encoder) {
        warn("concept vector was fitted with encoder '" + stored.encoder_name + "', embeddings come from '" +
             emb.encoder + "'");
      }
      std::vector<cvp::EmbeddingRecord> to_score;
      auto out_missing = open_output(r.path("missing_ids.tsv"));
      if (!sentences.empty()) {
        const auto alignment = cvp::align(sentences, emb.records);
        for (const auto& p : alignment.pairs) to_score.push_back(emb.records[p.embedding]);
        cvp::text::write_row(out_missing, {"id", "missing_from"}, '\t');
        for (const auto& id : alignment.missing_corpus) cvp::text::write_row(out_missing, {id, "embeddings"}, '\t');
        std::size_t unused = 0;
        for (const auto& id : alignment.missing_embeddings) {
          if (keep && !keep->count(id)) continue;
          cvp::text::write_row(out_missing, {id, "corpus"}, '\t');
          ++unused;
        }
        n_missing = alignment.missing_corpus.size() + unused;
        if (!alignment.missing_corpus.empty()) {
          warn(std::to_string(alignment.missing_corpus.size()) + " sentence(s) have no embedding");
        }
      } else {
        cvp::text::write_row(out_missing, {"id", "missing_from"}, '\t');
        for (auto& rec : emb.records) {
          if (!keep || keep->count(rec.id)) to_score.push_back(std::move(rec));
        }
        if (keep) {
          std::unordered_set<std::string> present;
          for (const auto& rec : to_score) present.insert(rec.id);
          std::vector<std::string> absent;
          for (const auto& id : *keep) {
            if (!present.count(id)) absent.push_back(id);
          }
          std::sort(absent.begin(), absent.end());
          for (const auto& id : absent) cvp::text::write_row(out_missing, {id, "embeddings"}, '\t');
          n_missing = absent.size();
        }
      }
      scores = cvp::project_batch(to_score, stored.vector, name.empty() ? "projection" : name);
    }

    write_scores_tsv(r.path("scores.tsv"), scores);
    auto& m = r.manifest();
    m["name"] = scores.scorer_name;
    m["scores"] = "scores.tsv";
    m["encoder"] = encoder_name;
    m["count"] = scores.size();
    m["missing"] = n_missing;
    r.finish();
    std::cout << "scored " << scores.size() << " sentence(s) with " << scores.scorer_name << '\n';
  }
};

struct EvaluateCmd {
  CorpusOptions corpus;
  DiagnosticOptions diag;
  LeakageOptions leakage;
  std::string scores;
  std::string name;

  void add(CLI::App* cmd) {
    add_corpus_options(cmd, corpus, true);
    add_diagnostic_options(cmd, diag);
    add_leakage_options(cmd, leakage);
    cmd->add_option("--scores", scores, "Score file (id + score, or id + label + confidence)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--name", name, "Scorer name (default: from the score manifest or file name)");
  }

  void run(const CLI::App* cmd, const Global& g) {
    const auto sentences = load_corpus(corpus);
    const auto opts = evaluation_options(diag, leakage);
    std::string scorer = name;
    if (scorer.empty()) {
      std::ifstream in(fs::path(scores).parent_path() / "score.manifest.json");
      if (in) {
        try {
          scorer = nlohmann::json::parse(in).value("name", std::string());
        } catch (const nlohmann::json::exception&) {
        }
      }
      if (scorer.empty()) scorer = fs::path(scores).stem().string();
    }
    const auto set = cvp::ingest_external_scores(fs::path(scores), scorer);
    auto report = cvp::evaluate(sentences, set, opts);
    report.encoder = encoder_beside(scores);
    if (!report.watermark.empty()) warn(report.watermark);

    Run r("evaluate", cmd, g.out, g.seed);
    {
      auto out = open_output(r.path("report.json"));
      out << cvp::to_json(report).dump(2) << '\n';
    }
    {
      auto out = open_output(r.path("report.tsv"));
      cvp::write_report_tsv(out, report);
    }
    for (const auto& [dist_name, d] : report.distribution) {
      auto out = open_output(r.path("histogram_" + file_safe(dist_name) + ".tsv"));
      cvp::write_histogram_tsv(out, d);
    }
    auto& m = r.manifest();
    m["scorer"] = report.scorer_name;
    m["encoder"] = report.encoder;
    m["watermark"] = report.watermark;
    r.finish();

    const auto& overall = report.slices.front();
    std::cout << report.scorer_name << ": n=" << overall.n << " rho="
              << (overall.spearman_rho ? cvp::text::format_double(*overall.spearman_rho) : "NA") << '\n';
  }
};

struct CompareCmd {
  CorpusOptions corpus;
  DiagnosticOptions diag;
  LeakageOptions leakage;
  std::vector<std::string> scorers;
  std::string lexicon;

  void add(CLI::App* cmd) {
    add_corpus_options(cmd, corpus, true);
    add_diagnostic_options(cmd, diag);
    add_leakage_options(cmd, leakage);
    cmd->add_option("--scorer", scorers, "NAME=PATH of a score file; repeatable");
    cmd->add_option("--lexicon", lexicon, "Also score the corpus with this lexicon")->check(CLI::ExistingFile);
  }

  void run(const CLI::App* cmd, const Global& g) {
    const auto sentences = load_corpus(corpus);
    const auto opts = evaluation_options(diag, leakage);
    std::vector<cvp::ScoreSet> sets;
    std::set<std::string> names;
    for (const auto& spec : scorers) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
        throw cvp::Error(cvp::ErrorKind::InvalidArgument, "--scorer expects NAME=PATH, got '" + spec + "'");
      }
      const std::string scorer = spec.substr(0, eq);
      const fs::path path = spec.substr(eq + 1);
      if (!names.insert(scorer).second) {
        throw cvp::Error(cvp::ErrorKind::InvalidArgument, "scorer name '" + scorer + "' given twice");
      }
      if (!fs::is_regular_file(path)) {
        warn("score file for '" + scorer + "' not found (" + path.string() + "); row omitted");
        continue;
      }
      sets.push_back(cvp::ingest_external_scores(path, scorer));
    }
    if (!lexicon.empty()) {
      if (!names.insert("lexicon").second) {
        throw cvp::Error(cvp::ErrorKind::InvalidArgument, "scorer name 'lexicon' given twice");
      }
      const auto lex = cvp::Lexicon::load(fs::path(lexicon));
      cvp::ScoreSet s;
      s.scorer_name = "lexicon";
      for (const auto& sentence : sentences) s.entries.push_back({sentence.id, cvp::lexicon_score(sentence.text, lex)});
      sets.push_back(std::move(s));
    }
    if (sets.empty()) throw cvp::Error(cvp::ErrorKind::InvalidArgument, "no scorers to compare");

    const auto table = cvp::compare_scorers(sentences, sets, opts);
    if (!table.watermark.empty()) warn(table.watermark);

    Run r("compare", cmd, g.out, g.seed);
    {
      auto out = open_output(r.path("compare.tsv"));
      cvp::write_comparison_tsv(out, table);
    }
    {
      auto out = open_output(r.path("compare.json"));
      out << cvp::to_json(table).dump(2) << '\n';
    }
    auto& m = r.manifest();
    ordered_json rows = ordered_json::array();
    for (const auto& row : table.rows) rows.push_back(row.scorer_name);
    m["scorers"] = rows;
    m["watermark"] = table.watermark;
    r.finish();
    for (const auto& row : table.rows) {
      const auto& c = row.cells.front();
      std::cout << (c.rank ? std::to_string(*c.rank) : "-") << '\t' << row.scorer_name << '\t'
                << (c.rho ? cvp::text::format_double(*c.rho) : "NA") << '\n';
    }
  }
};

struct ArcCmd {
  CorpusOptions corpus;
  std::string scores;
  std::string document_key = "source";
  std::vector<std::string> documents;
  std::string method = "moving_average";
  double window = 5.0;
  bool calibrate = false;
  std::string calibrate_ids;
  double low_q = 0.0;
  double high_q = 1.0;

  void add(CLI::App* cmd) {
    add_corpus_options(cmd, corpus, true);
    cmd->add_option("--scores", scores, "Score file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--document-key", document_key, "Tag that names the document")
        ->check(CLI::IsMember({"genre", "language", "source"}))
        ->capture_default_str();
    cmd->add_option("--document", documents, "Only these documents (repeatable)");
    cmd->add_option("--method", method, "Smoothing")
        ->check(CLI::IsMember({"moving_average", "gaussian"}))
        ->capture_default_str();
    cmd->add_option("--window", window, "Window length (moving_average) or bandwidth (gaussian)")
        ->capture_default_str();
    cmd->add_flag("--calibrate", calibrate, "Map score quantiles onto [-1, 1] before smoothing");
    cmd->add_option("--calibrate-ids", calibrate_ids, "Ids whose scores define the calibration (default: all)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--low-q", low_q, "Lower calibration quantile")->capture_default_str();
    cmd->add_option("--high-q", high_q, "Upper calibration quantile")->capture_default_str();
  }

  void run(const CLI::App* cmd, const Global& g) {
    const auto sentences = load_corpus(corpus);
    auto set = cvp::ingest_external_scores(fs::path(scores), fs::path(scores).stem().string());
    const auto smoothing = cvp::parse_smoothing_method(method);

    if (calibrate) {
      std::vector<double> source;
      if (calibrate_ids.empty()) {
        source = set.scores();
      } else {
        const auto list = read_id_list(calibrate_ids);
        const std::unordered_set<std::string> ref(list.begin(), list.end());
        for (const auto& e : set.entries) {
          if (ref.count(e.id)) source.push_back(e.score);
        }
      }
      const auto map = cvp::fit_calibration(source, cvp::QuantileSpec{low_q, high_q, -1.0, 1.0});
      set = cvp::apply_calibration(set, map);
    }

    const auto index = set.index();
    std::vector<std::string> order;
    std::map<std::string, cvp::ScoreSet> by_doc;
    std::size_t unscored = 0;
    for (const auto& s : sentences) {
      const std::string& doc = s.tag(document_key);
      auto it = index.find(s.id);
      if (it == index.end()) {
        ++unscored;
        continue;
      }
      auto [slot, inserted] = by_doc.try_emplace(doc);
      if (inserted) order.push_back(doc);
      slot->second.entries.push_back(set.entries[it->second]);
    }
    if (unscored) warn(std::to_string(unscored) + " corpus sentence(s) have no score and are left out");

    std::vector<std::string> selected = documents.empty() ? order : documents;
    std::vector<cvp::SentimentArc> arcs;
    for (const auto& doc : selected) {
      auto it = by_doc.find(doc);
      if (it == by_doc.end() || it->second.empty()) {
        throw cvp::Error(cvp::ErrorKind::EmptyInput, "document '" + doc + "' has no scored sentences");
      }
      arcs.push_back(cvp::build_arc(doc, it->second, smoothing, window));
    }
    if (arcs.empty()) throw cvp::Error(cvp::ErrorKind::EmptyInput, "no scored sentences to build arcs from");

    Run r("arc", cmd, g.out, g.seed);
    {
      auto out = open_output(r.path("arcs.tsv"));
      cvp::write_arc_tsv(out, arcs);
    }
    auto& m = r.manifest();
    m["documents"] = selected;
    m["method"] = std::string(cvp::to_string(smoothing));
    m["window"] = window;
    r.finish();
    std::cout << "wrote " << arcs.size() << " arc(s)\n";
  }
};

int exit_code_for(const cvp::Error& e) {
  switch (cvp::classify(e.kind())) {
    case cvp::ErrorClass::User: return kExitUser;
    case cvp::ErrorClass::Data: return kExitData;
    case cvp::ErrorClass::Internal: return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concept-vector sentiment projection: split, fit, score, evaluate, compare, arc"};
  app.set_config("--config", "", "TOML file with one [section] per subcommand; flags win");
  app.require_subcommand(1);
  app.fallthrough();

  Global global;
  app.add_option("--seed", global.seed, "Seed for every random choice; recorded in manifests")->capture_default_str();

  SplitCmd split;
  FitCmd fit;
  ScoreCmd score;
  EvaluateCmd evaluate;
  CompareCmd compare;
  ArcCmd arc;

  struct Entry {
    CLI::App* cmd;
    std::function<void(const CLI::App*)> run;
  };
  std::vector<Entry> entries;
  auto add = [&](const char* name, const char* help, auto& impl) {
    CLI::App* cmd = app.add_subcommand(name, help);
    cmd->add_option("--out,-o", global.out, "Run directory for outputs")->required();
    impl.add(cmd);
    entries.push_back({cmd, [&impl, &global](const CLI::App* c) { impl.run(c, global); }});
  };
  add("split", "Split labelled sentences into concept corpus and test set", split);
  add("fit", "Fit a concept vector from positive and negative exemplars", fit);
  add("score", "Score sentences by projection (or with a lexicon)", score);
  add("evaluate", "Correlate one scorer with the human ratings", evaluate);
  add("compare", "Rank several scorers side by side", compare);
  add("arc", "Build smoothed sentiment arcs per document", arc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUser;
  }

  try {
    for (const auto& e : entries) {
      if (e.cmd->parsed()) e.run(e.cmd);
    }
  } catch (const cvp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUser;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}

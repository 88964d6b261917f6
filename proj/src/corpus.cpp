#include "cvp/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <variant>

#include <json.hpp>

#include "cvp/error.hpp"
#include "cvp/text/dsv.hpp"
#include "cvp/text/format.hpp"

namespace cvp {

using nlohmann::json;

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Positive: return "positive";
    case Label::Negative: return "negative";
    case Label::Neutral: return "neutral";
    case Label::Unknown: return "unknown";
  }
  return "unknown";
}

void RatingScale::validate() const {
  if (!std::isfinite(min) || !std::isfinite(max) || !(min < max)) {
    throw Error(ErrorKind::InvalidArgument, "rating scale needs min < max");
  }
  if (lower.has_value() != upper.has_value()) {
    throw Error(ErrorKind::InvalidArgument, "rating scale needs both thresholds or neither");
  }
  if (lower && !(*lower < *upper)) {
    throw Error(ErrorKind::InvalidArgument, "rating scale needs lower threshold < upper threshold");
  }
}

Label derive_label(double mean_rating, const RatingScale& scale) {
  if (!std::isfinite(mean_rating) || mean_rating < scale.min || mean_rating > scale.max) {
    throw Error(ErrorKind::OutOfScale, "rating " + text::format_double(mean_rating) +
                                           " outside [" + text::format_double(scale.min) + ", " +
                                           text::format_double(scale.max) + "]");
  }
  if (!scale.lower || !scale.upper) return Label::Unknown;
  if (mean_rating >= *scale.upper) return Label::Positive;
  if (mean_rating <= *scale.lower) return Label::Negative;
  return Label::Neutral;
}

bool is_known_tag(std::string_view key) {
  return key == "genre" || key == "language" || key == "source";
}

const std::string& LabeledSentence::tag(std::string_view key) const {
  if (key == "genre") return genre;
  if (key == "language") return language;
  if (key == "source") return source;
  throw Error(ErrorKind::InvalidArgument, "unknown tag '" + std::string(key) +
                                              "' (expected genre, language or source)");
}

// --- parsing ---------------------------------------------------------------

ColumnMap ColumnMap::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("column map is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::InvalidArgument, "column map must be a JSON object");
  ColumnMap map;
  const std::pair<const char*, std::string*> fields[] = {
      {"id", &map.id},           {"text", &map.text},         {"rating", &map.rating},
      {"ratings", &map.ratings}, {"genre", &map.genre},       {"language", &map.language},
      {"source", &map.source}};
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto match = std::find_if(std::begin(fields), std::end(fields),
                              [&](const auto& f) { return it.key() == f.first; });
    if (match == std::end(fields)) {
      throw Error(ErrorKind::InvalidArgument, "column map has unknown key '" + it.key() + "'");
    }
    if (!it->is_string()) {
      throw Error(ErrorKind::InvalidArgument, "column map value for '" + it.key() + "' must be a string");
    }
    *match->second = it->get<std::string>();
  }
  return map;
}

ColumnMap ColumnMap::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open column map " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

CorpusFormatSpec CorpusFormatSpec::for_path(const std::filesystem::path& path) {
  CorpusFormatSpec spec;
  const std::string ext = text::to_lower_ascii(path.extension().string());
  if (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") {
    spec.format = CorpusFormat::JsonLines;
  } else {
    spec.format = CorpusFormat::Delimited;
    spec.delimiter = ext == ".csv" ? ',' : '\t';
  }
  return spec;
}

namespace {

// Raw field values for one row, before validation.
struct RawRow {
  std::string id;
  std::string text;
  std::optional<double> rating;
  std::vector<double> ratings;
  std::string genre, language, source;
};

// Turns a raw row into a sentence; returns an error message instead when the
// row violates a sentence invariant.
std::variant<LabeledSentence, std::string> finish_row(RawRow raw, const RatingScale& scale) {
  if (text::trim(raw.id).empty()) return std::string("empty id");
  LabeledSentence s;
  s.id = std::move(raw.id);
  s.text = std::move(raw.text);
  s.genre = std::move(raw.genre);
  s.language = std::move(raw.language);
  s.source = std::move(raw.source);
  s.ratings = std::move(raw.ratings);
  if (!s.ratings.empty()) {
    double sum = 0.0;
    for (double r : s.ratings) sum += r;
    const double mean = sum / static_cast<double>(s.ratings.size());
    if (raw.rating && std::abs(*raw.rating - mean) > 1e-9) {
      return "rating " + text::format_double(*raw.rating) + " disagrees with the mean of ratings " +
             text::format_double(mean);
    }
    s.mean_rating = mean;
  } else {
    s.mean_rating = raw.rating;
  }
  if (s.mean_rating) {
    try {
      s.label = derive_label(*s.mean_rating, scale);
    } catch (const Error& e) {
      return std::string(e.what());
    }
  }
  return s;
}

std::optional<std::string> parse_ratings_cell(std::string_view cell, char sep,
                                              std::vector<double>& out) {
  out.clear();
  if (text::trim(cell).empty()) return std::nullopt;
  std::size_t start = 0;
  for (;;) {
    const std::size_t end = cell.find(sep, start);
    const std::string_view piece = cell.substr(start, end == std::string_view::npos ? end : end - start);
    auto v = text::parse_double(piece);
    if (!v) return "non-numeric rating '" + std::string(text::trim(piece)) + "'";
    out.push_back(*v);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return std::nullopt;
}

ParsedCorpus parse_delimited(std::istream& in, const CorpusFormatSpec& spec) {
  text::DsvReader reader(in, spec.delimiter);
  std::vector<std::string> header;
  if (!reader.next(header)) throw Error(ErrorKind::EmptyFile, "corpus has no header");

  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto c_id = column(spec.columns.id);
  const auto c_text = column(spec.columns.text);
  const auto c_rating = column(spec.columns.rating);
  const auto c_ratings = column(spec.columns.ratings);
  const auto c_genre = column(spec.columns.genre);
  const auto c_language = column(spec.columns.language);
  const auto c_source = column(spec.columns.source);
  if (!c_id) throw Error(ErrorKind::MissingColumn, "no '" + spec.columns.id + "' column");
  if (!c_text) throw Error(ErrorKind::MissingColumn, "no '" + spec.columns.text + "' column");
  if (!c_rating && !c_ratings) {
    throw Error(ErrorKind::MissingColumn,
                "no '" + spec.columns.rating + "' or '" + spec.columns.ratings + "' column");
  }

  ParsedCorpus out;
  std::unordered_set<std::string> seen;
  std::vector<std::string> fields;
  std::size_t row = 0;
  while (reader.next(fields)) {
    ++row;
    if (fields.size() != header.size()) {
      out.errors.push_back({row, "expected " + std::to_string(header.size()) + " fields, found " +
                                     std::to_string(fields.size())});
      continue;
    }
    RawRow raw;
    raw.id = std::string(text::trim(fields[*c_id]));
    raw.text = fields[*c_text];
    if (c_genre) raw.genre = fields[*c_genre];
    if (c_language) raw.language = fields[*c_language];
    if (c_source) raw.source = fields[*c_source];
    if (c_rating && !text::trim(fields[*c_rating]).empty()) {
      raw.rating = text::parse_double(fields[*c_rating]);
      if (!raw.rating) {
        out.errors.push_back({row, "non-numeric rating '" + fields[*c_rating] + "'"});
        continue;
      }
    }
    if (c_ratings) {
      if (auto err = parse_ratings_cell(fields[*c_ratings], spec.ratings_separator, raw.ratings)) {
        out.errors.push_back({row, *err});
        continue;
      }
    }
    auto result = finish_row(std::move(raw), spec.scale);
    if (auto* err = std::get_if<std::string>(&result)) {
      out.errors.push_back({row, *err});
      continue;
    }
    auto& sentence = std::get<LabeledSentence>(result);
    if (!seen.insert(sentence.id).second) {
      out.errors.push_back({row, "duplicate id '" + sentence.id + "'"});
      continue;
    }
    out.sentences.push_back(std::move(sentence));
  }
  if (row == 0) throw Error(ErrorKind::EmptyFile, "corpus has a header but no rows");
  return out;
}

std::optional<std::string> json_string_field(const json& obj, const std::string& key,
                                             std::string& out) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) return "field '" + key + "' must be a string";
  out = it->get<std::string>();
  return std::nullopt;
}

ParsedCorpus parse_json_lines(std::istream& in, const CorpusFormatSpec& spec) {
  ParsedCorpus out;
  std::unordered_set<std::string> seen;
  bool saw_rating_field = false;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    ++row;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      out.errors.push_back({row, std::string("invalid JSON: ") + e.what()});
      continue;
    }
    if (!obj.is_object()) {
      out.errors.push_back({row, "row is not a JSON object"});
      continue;
    }
    if (!obj.contains(spec.columns.id)) {
      throw Error(ErrorKind::MissingColumn, "row " + std::to_string(row) + " has no '" +
                                                spec.columns.id + "' field");
    }
    if (!obj.contains(spec.columns.text)) {
      throw Error(ErrorKind::MissingColumn, "row " + std::to_string(row) + " has no '" +
                                                spec.columns.text + "' field");
    }
    RawRow raw;
    std::optional<std::string> err;
    const auto& id_field = obj[spec.columns.id];
    if (id_field.is_string()) {
      raw.id = id_field.get<std::string>();
    } else if (id_field.is_number_integer()) {
      raw.id = id_field.dump();
    } else {
      err = "field '" + spec.columns.id + "' must be a string or integer";
    }
    if (!err) err = json_string_field(obj, spec.columns.text, raw.text);
    if (!err) err = json_string_field(obj, spec.columns.genre, raw.genre);
    if (!err) err = json_string_field(obj, spec.columns.language, raw.language);
    if (!err) err = json_string_field(obj, spec.columns.source, raw.source);
    if (!err) {
      if (auto it = obj.find(spec.columns.rating); it != obj.end()) {
        saw_rating_field = true;
        if (it->is_number() && std::isfinite(it->get<double>())) {
          raw.rating = it->get<double>();
        } else if (!it->is_null()) {
          err = "non-numeric rating " + it->dump();
        }
      }
    }
    if (!err) {
      if (auto it = obj.find(spec.columns.ratings); it != obj.end()) {
        saw_rating_field = true;
        if (it->is_array()) {
          for (const auto& v : *it) {
            if (!v.is_number() || !std::isfinite(v.get<double>())) {
              err = "non-numeric rating " + v.dump();
              break;
            }
            raw.ratings.push_back(v.get<double>());
          }
        } else if (!it->is_null()) {
          err = "field '" + spec.columns.ratings + "' must be an array of numbers";
        }
      }
    }
    if (err) {
      out.errors.push_back({row, *err});
      continue;
    }
    auto result = finish_row(std::move(raw), spec.scale);
    if (auto* msg = std::get_if<std::string>(&result)) {
      out.errors.push_back({row, *msg});
      continue;
    }
    auto& sentence = std::get<LabeledSentence>(result);
    if (!seen.insert(sentence.id).second) {
      out.errors.push_back({row, "duplicate id '" + sentence.id + "'"});
      continue;
    }
    out.sentences.push_back(std::move(sentence));
  }
  if (row == 0) throw Error(ErrorKind::EmptyFile, "corpus has no rows");
  if (!saw_rating_field) {
    throw Error(ErrorKind::MissingColumn,
                "no row has a '" + spec.columns.rating + "' or '" + spec.columns.ratings + "' field");
  }
  return out;
}

}  // namespace

ParsedCorpus parse_corpus(std::istream& in, const CorpusFormatSpec& spec) {
  spec.scale.validate();
  return spec.format == CorpusFormat::JsonLines ? parse_json_lines(in, spec)
                                                : parse_delimited(in, spec);
}

ParsedCorpus read_corpus(const std::filesystem::path& path, const CorpusFormatSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open corpus " + path.string());
  return parse_corpus(in, spec);
}

ScoreSet gold_scores(std::span<const LabeledSentence> corpus, std::string name) {
  ScoreSet out;
  out.scorer_name = std::move(name);
  for (const auto& s : corpus) {
    if (s.mean_rating) out.entries.push_back({s.id, *s.mean_rating});
  }
  return out;
}

// --- concept/test split ----------------------------------------------------

void SplitSpec::validate() const {
  if (!(concept_fraction > 0.0 && concept_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "concept fraction must lie strictly between 0 and 1");
  }
  for (const auto& key : stratify_by) {
    if (!is_known_tag(key)) {
      throw Error(ErrorKind::InvalidArgument, "cannot stratify by unknown tag '" + key + "'");
    }
  }
}

void seeded_shuffle(std::vector<std::string>& ids, std::mt19937_64& engine) {
  for (std::size_t i = ids.size(); i > 1; --i) {
    const unsigned __int128 wide = static_cast<unsigned __int128>(engine()) * i;
    const auto j = static_cast<std::size_t>(wide >> 64);
    std::swap(ids[i - 1], ids[j]);
  }
}

SplitResult split_concept_test(std::span<const LabeledSentence> sentences, const SplitSpec& spec) {
  spec.validate();
  if (sentences.empty()) throw Error(ErrorKind::EmptyInput, "nothing to split");

  std::unordered_map<std::string, const LabeledSentence*> by_id;
  by_id.reserve(sentences.size());
  for (const auto& s : sentences) {
    if (!by_id.emplace(s.id, &s).second) {
      throw Error(ErrorKind::DuplicateId, "split input repeats id '" + s.id + "'");
    }
  }

  // stratum key -> ids, ordered so iteration is deterministic
  auto strata_of = [&](Label label) {
    std::map<std::vector<std::string>, std::vector<std::string>> strata;
    for (const auto& s : sentences) {
      if (s.label != label) continue;
      std::vector<std::string> key;
      for (const auto& tag : spec.stratify_by) key.push_back(s.tag(tag));
      strata[key].push_back(s.id);
    }
    return strata;
  };

  SplitResult out;
  std::unordered_set<std::string> concept_ids;
  std::mt19937_64 engine(spec.seed);
  for (Label label : {Label::Positive, Label::Negative}) {
    auto strata = strata_of(label);
    if (strata.empty()) {
      out.warnings.push_back("no " + std::string(to_string(label)) +
                             " sentences: the concept corpus has an empty " +
                             std::string(to_string(label)) + " class");
    }
    for (auto& [key, ids] : strata) {
      std::sort(ids.begin(), ids.end());
      seeded_shuffle(ids, engine);
      const auto take = static_cast<std::size_t>(
          std::round(spec.concept_fraction * static_cast<double>(ids.size())));
      for (std::size_t i = 0; i < take; ++i) concept_ids.insert(ids[i]);
    }
  }

  std::vector<const LabeledSentence*> ordered;
  ordered.reserve(sentences.size());
  for (const auto& s : sentences) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* a, const auto* b) { return a->id < b->id; });
  for (const auto* s : ordered) {
    (concept_ids.count(s->id) ? out.concept_corpus : out.test_set).push_back(*s);
  }
  return out;
}

}  // namespace cvp

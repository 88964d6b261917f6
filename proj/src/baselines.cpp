#include "cvp/baselines.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include <json.hpp>
#include <unicode/brkiter.h>
#include <unicode/locid.h>
#include <unicode/unistr.h>

#include "cvp/error.hpp"
#include "cvp/text/dsv.hpp"
#include "cvp/text/format.hpp"

namespace cvp {

using nlohmann::json;

Polarity parse_polarity(std::string_view label) {
  const std::string lower = text::to_lower_ascii(text::trim(label));
  if (lower == "positive") return Polarity::Positive;
  if (lower == "neutral") return Polarity::Neutral;
  if (lower == "negative") return Polarity::Negative;
  throw Error(ErrorKind::UnknownLabel, "'" + std::string(label) + "' is not positive, neutral or negative");
}

double convert_confidence(const ClassifierOutput& output) {
  switch (output.label) {
    case Polarity::Positive: return output.confidence;
    case Polarity::Negative: return -output.confidence;
    case Polarity::Neutral: return 0.0;
  }
  return 0.0;
}

// --- lexicon ---------------------------------------------------------------

namespace {

icu::BreakIterator& word_breaker() {
  thread_local std::unique_ptr<icu::BreakIterator> breaker = [] {
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::BreakIterator> bi(
        icu::BreakIterator::createWordInstance(icu::Locale::getRoot(), status));
    if (U_FAILURE(status) || !bi) {
      throw Error(ErrorKind::Internal, std::string("ICU word break iterator unavailable: ") + u_errorName(status));
    }
    return bi;
  }();
  return *breaker;
}

std::string lowercase_utf8(std::string_view s) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u.toLower(icu::Locale::getRoot());
  std::string out;
  u.toUTF8String(out);
  return out;
}

}  // namespace

std::vector<std::string> tokenize_words(std::string_view input) {
  std::vector<std::string> tokens;
  icu::UnicodeString u =
      icu::UnicodeString::fromUTF8(icu::StringPiece(input.data(), static_cast<int32_t>(input.size())));
  auto& bi = word_breaker();
  bi.setText(u);
  int32_t start = bi.first();
  for (int32_t end = bi.next(); end != icu::BreakIterator::DONE; start = end, end = bi.next()) {
    if (bi.getRuleStatus() == UBRK_WORD_NONE) continue;
    icu::UnicodeString piece(u, start, end - start);
    piece.toLower(icu::Locale::getRoot());
    std::string token;
    piece.toUTF8String(token);
    tokens.push_back(std::move(token));
  }
  return tokens;
}

Lexicon::Lexicon(std::unordered_map<std::string, double> entries, std::unordered_set<std::string> negators)
    : negators_(std::move(negators)) {
  for (auto& [token, score] : entries) {
    if (!std::isfinite(score)) throw Error(ErrorKind::NonFinite, "lexicon score for '" + token + "'");
    if (!entries_.emplace(lowercase_utf8(token), score).second) {
      throw Error(ErrorKind::DuplicateId, "lexicon repeats token '" + token + "' after lowercasing");
    }
  }
  if (entries_.empty()) throw Error(ErrorKind::InvalidArgument, "lexicon has no scored entries");
  std::unordered_set<std::string> lowered;
  for (const auto& n : negators_) lowered.insert(lowercase_utf8(n));
  negators_ = std::move(lowered);
}

Lexicon Lexicon::load(std::istream& in) {
  std::unordered_map<std::string, double> entries;
  std::unordered_set<std::string> negators;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto split = trimmed.find_first_of(" \t");
    if (split == std::string_view::npos) {
      throw Error(ErrorKind::Malformed, "lexicon line " + std::to_string(line_no) + " has no score");
    }
    const std::string token = lowercase_utf8(trimmed.substr(0, split));
    const std::string_view value = text::trim(trimmed.substr(split));
    if (text::to_lower_ascii(value) == "negator") {
      negators.insert(token);
      continue;
    }
    const auto score = text::parse_double(value);
    if (!score) {
      throw Error(ErrorKind::Malformed, "lexicon line " + std::to_string(line_no) +
                                            ": '" + std::string(value) + "' is not a number");
    }
    if (!entries.emplace(token, *score).second) {
      throw Error(ErrorKind::DuplicateId,
                  "lexicon line " + std::to_string(line_no) + " repeats token '" + token + "'");
    }
  }
  return Lexicon(std::move(entries), std::move(negators));
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open lexicon " + path.string());
  return load(in);
}

LexiconMatch Lexicon::match_tokens(const std::vector<std::string>& tokens) const {
  LexiconMatch out;
  std::vector<std::size_t> pending;  // positions of negators not yet applied
  for (std::size_t j = 0; j < tokens.size(); ++j) {
    if (negators_.count(tokens[j])) {
      pending.push_back(j);
      continue;
    }
    auto it = entries_.find(tokens[j]);
    if (it == entries_.end()) continue;
    std::size_t flips = 0;
    for (std::size_t pos : pending) {
      if (j - pos <= kNegationWindow) ++flips;
    }
    pending.clear();
    out.sum += flips % 2 == 1 ? -it->second : it->second;
    ++out.matched;
  }
  return out;
}

LexiconMatch Lexicon::match(std::string_view input) const { return match_tokens(tokenize_words(input)); }

double lexicon_score(std::string_view input, const Lexicon& lexicon) {
  const LexiconMatch m = lexicon.match(input);
  if (m.matched == 0) return 0.0;
  return m.sum / std::sqrt(static_cast<double>(m.matched));
}

// --- external scores -------------------------------------------------------

namespace {

struct ExternalRow {
  std::string id;
  std::optional<double> score;
  std::optional<std::string> label;
  std::optional<double> confidence;
  bool bad_confidence = false;
};

double resolve_row(const ExternalRow& row, std::size_t row_no) {
  const std::string where = "score file row " + std::to_string(row_no);
  if (row.id.empty()) throw Error(ErrorKind::Malformed, where + ": empty id");
  if (row.score) return *row.score;
  if (!row.label) throw Error(ErrorKind::Malformed, where + ": needs a score or a label and confidence");
  const Polarity label = [&] {
    try {
      return parse_polarity(*row.label);
    } catch (const Error&) {
      throw Error(ErrorKind::UnknownLabel, where + ": unknown label '" + *row.label + "'");
    }
  }();
  if (row.bad_confidence || !row.confidence) {
    throw Error(ErrorKind::Malformed, where + ": missing or non-numeric confidence");
  }
  if (*row.confidence < 0.0 || *row.confidence > 1.0) {
    throw Error(ErrorKind::Malformed, where + ": confidence outside [0, 1]");
  }
  return convert_confidence({row.id, label, *row.confidence});
}

void add_entry(ScoreSet& out, std::unordered_set<std::string>& seen, std::string id, double score,
               std::size_t row_no) {
  if (!seen.insert(id).second) {
    throw Error(ErrorKind::DuplicateId, "score file row " + std::to_string(row_no) + " repeats id '" + id + "'");
  }
  out.entries.push_back({std::move(id), score});
}

}  // namespace

ScoreSet ingest_external_scores(std::istream& in, std::string scorer_name, char delimiter) {
  ScoreSet out;
  out.scorer_name = std::move(scorer_name);
  std::unordered_set<std::string> seen;

  std::stringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();
  const auto first = content.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
  if (first == std::string::npos) throw Error(ErrorKind::EmptyFile, "score file is empty");

  if (content[first] == '{') {
    std::istringstream lines(content);
    std::string line;
    std::size_t row_no = 0;
    while (std::getline(lines, line)) {
      if (text::trim(line).empty()) continue;
      ++row_no;
      json obj;
      try {
        obj = json::parse(line);
      } catch (const json::exception& e) {
        throw Error(ErrorKind::Malformed, "score file row " + std::to_string(row_no) + ": " + e.what());
      }
      ExternalRow row;
      if (auto it = obj.find("id"); it != obj.end() && it->is_string()) row.id = it->get<std::string>();
      else if (it != obj.end() && it->is_number_integer()) row.id = it->dump();
      if (auto it = obj.find("score"); it != obj.end() && !it->is_null()) {
        if (!it->is_number()) throw Error(ErrorKind::Malformed, "score file row " + std::to_string(row_no) + ": non-numeric score");
        row.score = it->get<double>();
      }
      if (auto it = obj.find("label"); it != obj.end() && it->is_string()) row.label = it->get<std::string>();
      if (auto it = obj.find("confidence"); it != obj.end() && !it->is_null()) {
        if (it->is_number()) row.confidence = it->get<double>();
        else row.bad_confidence = true;
      }
      const double score = resolve_row(row, row_no);
      add_entry(out, seen, std::move(row.id), score, row_no);
    }
  } else {
    std::istringstream body(content);
    text::DsvReader reader(body, delimiter);
    std::vector<std::string> header;
    reader.next(header);
    auto column = [&](std::string_view name) -> std::optional<std::size_t> {
      for (std::size_t i = 0; i < header.size(); ++i) {
        if (text::trim(header[i]) == name) return i;
      }
      return std::nullopt;
    };
    const auto c_id = column("id");
    const auto c_score = column("score");
    const auto c_label = column("label");
    const auto c_conf = column("confidence");
    if (!c_id) throw Error(ErrorKind::MissingColumn, "score file has no 'id' column");
    if (!c_score && !(c_label && c_conf)) {
      throw Error(ErrorKind::MissingColumn, "score file needs 'score' or 'label' and 'confidence' columns");
    }
    std::vector<std::string> fields;
    std::size_t row_no = 0;
    while (reader.next(fields)) {
      ++row_no;
      if (fields.size() != header.size()) {
        throw Error(ErrorKind::Malformed, "score file row " + std::to_string(row_no) + ": expected " +
                                              std::to_string(header.size()) + " fields");
      }
      ExternalRow row;
      row.id = std::string(text::trim(fields[*c_id]));
      if (c_score && !text::trim(fields[*c_score]).empty()) {
        row.score = text::parse_double(fields[*c_score]);
        if (!row.score) {
          throw Error(ErrorKind::Malformed, "score file row " + std::to_string(row_no) +
                                                ": non-numeric score '" + fields[*c_score] + "'");
        }
      }
      if (c_label && !text::trim(fields[*c_label]).empty()) row.label = fields[*c_label];
      if (c_conf && !text::trim(fields[*c_conf]).empty()) {
        row.confidence = text::parse_double(fields[*c_conf]);
        row.bad_confidence = !row.confidence;
      }
      const double score = resolve_row(row, row_no);
      add_entry(out, seen, std::move(row.id), score, row_no);
    }
  }
  return out;
}

ScoreSet ingest_external_scores(const std::filesystem::path& path, std::string scorer_name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open score file " + path.string());
  return ingest_external_scores(in, std::move(scorer_name), text::delimiter_for(path.string()));
}

}  // namespace cvp

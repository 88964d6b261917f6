#include "cvp/evaluation.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "cvp/error.hpp"
#include "cvp/text/format.hpp"

namespace cvp {

using nlohmann::json;

std::string SliceResult::column_name() const {
  return key == "all" ? std::string("all") : key + "=" + value;
}

namespace {

std::optional<IrrSummary> annotator_agreement(const std::vector<const LabeledSentence*>& sentences,
                                              AlphaLevel level) {
  std::size_t raters = 0;
  for (const auto* s : sentences) raters = std::max(raters, s->ratings.size());
  if (raters < 2) return std::nullopt;
  RatingMatrix m(sentences.size(), raters);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    for (std::size_t r = 0; r < sentences[i]->ratings.size(); ++r) m.set(i, r, sentences[i]->ratings[r]);
  }
  IrrSummary irr;
  irr.items = sentences.size();
  try {
    irr.alpha = krippendorff_alpha(m, level);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientData) throw;
  }
  try {
    irr.rho_mean_pairwise = pairwise_irr_rho(m);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientOverlap) throw;
  }
  return irr;
}

SliceResult evaluate_slice(std::string key, std::string value,
                           const std::vector<const LabeledSentence*>& sentences,
                           const std::vector<double>& predicted, AlphaLevel level) {
  SliceResult slice;
  slice.key = std::move(key);
  slice.value = std::move(value);
  slice.n = sentences.size();
  std::vector<double> gold;
  gold.reserve(sentences.size());
  for (const auto* s : sentences) gold.push_back(*s->mean_rating);
  try {
    slice.spearman_rho = spearman_rho(predicted, gold);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::TooFewPoints && e.kind() != ErrorKind::ZeroVariance) throw;
    slice.note = std::string(to_string(e.kind()));
  }
  slice.irr = annotator_agreement(sentences, level);
  return slice;
}

}  // namespace

EvaluationReport evaluate(std::span<const LabeledSentence> corpus, const ScoreSet& scores,
                          const EvaluationOptions& options) {
  scores.validate();
  for (const auto& key : options.slice_keys) {
    if (!is_known_tag(key)) throw Error(ErrorKind::InvalidArgument, "unknown slice key '" + key + "'");
  }

  const auto score_index = scores.index();
  std::vector<const LabeledSentence*> evaluated;
  std::vector<double> predicted;
  for (const auto& s : corpus) {
    if (!s.mean_rating) continue;
    if (options.restrict_to && !options.restrict_to->count(s.id)) continue;
    auto it = score_index.find(s.id);
    if (it == score_index.end()) continue;
    evaluated.push_back(&s);
    predicted.push_back(scores.entries[it->second].score);
  }

  EvaluationReport report;
  report.scorer_name = scores.scorer_name;

  std::string first_leak;
  for (const auto* s : evaluated) {
    if (options.concept_ids.count(s->id)) {
      if (report.leaked_ids == 0) first_leak = s->id;
      ++report.leaked_ids;
    }
  }
  if (report.leaked_ids > 0) {
    if (!options.allow_leakage) {
      throw Error(ErrorKind::Leakage,
                  std::to_string(report.leaked_ids) +
                      " evaluated ids belong to the concept corpus (first: '" + first_leak +
                      "'); evaluate the test set only or pass the leakage override");
    }
    report.watermark = "CONTAMINATED: " + std::to_string(report.leaked_ids) +
                       " evaluated ids were used to fit the concept vector";
  }

  report.slices.push_back(evaluate_slice("all", "all", evaluated, predicted, options.alpha_level));
  report.irr = report.slices.front().irr;

  for (const auto& key : options.slice_keys) {
    std::map<std::string, std::pair<std::vector<const LabeledSentence*>, std::vector<double>>> groups;
    for (std::size_t i = 0; i < evaluated.size(); ++i) {
      const auto& value = evaluated[i]->tag(key);
      if (value.empty()) continue;
      auto& g = groups[value];
      g.first.push_back(evaluated[i]);
      g.second.push_back(predicted[i]);
    }
    for (const auto& [value, group] : groups) {
      report.slices.push_back(evaluate_slice(key, value, group.first, group.second, options.alpha_level));
    }
  }

  if (!evaluated.empty()) {
    std::vector<double> gold;
    for (const auto* s : evaluated) gold.push_back(*s->mean_rating);
    report.distribution.emplace_back(scores.scorer_name,
                                     distribution_diagnostics(predicted, options.diagnostics));
    report.distribution.emplace_back(report.gold_name,
                                     distribution_diagnostics(gold, options.diagnostics));
  }
  return report;
}

ComparisonTable compare_scorers(std::span<const LabeledSentence> corpus,
                                std::span<const ScoreSet> scorers,
                                const EvaluationOptions& options) {
  ComparisonTable table;
  std::vector<EvaluationReport> reports;
  reports.reserve(scorers.size());
  for (const auto& s : scorers) reports.push_back(evaluate(corpus, s, options));

  // Column set is the union over scorers, overall first then sorted.
  std::map<std::string, std::optional<IrrSummary>> slice_columns;
  for (const auto& r : reports) {
    for (std::size_t i = 1; i < r.slices.size(); ++i) {
      slice_columns.emplace(r.slices[i].column_name(), r.slices[i].irr);
    }
  }
  table.columns.push_back("all");
  table.irr.push_back(reports.empty() ? std::nullopt : reports.front().irr);
  for (const auto& [name, irr] : slice_columns) {
    table.columns.push_back(name);
    table.irr.push_back(irr);
  }

  for (const auto& r : reports) {
    ComparisonRow row;
    row.scorer_name = r.scorer_name;
    row.cells.resize(table.columns.size());
    for (const auto& slice : r.slices) {
      auto it = std::find(table.columns.begin(), table.columns.end(), slice.column_name());
      auto& cell = row.cells[static_cast<std::size_t>(it - table.columns.begin())];
      cell.rho = slice.spearman_rho;
      cell.n = slice.n;
    }
    table.rows.push_back(std::move(row));
    if (!r.watermark.empty() && table.watermark.empty()) table.watermark = r.watermark;
  }

  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    std::vector<ComparisonRow*> ranked;
    for (auto& row : table.rows) {
      if (row.cells[c].rho) ranked.push_back(&row);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [c](const ComparisonRow* a, const ComparisonRow* b) {
      if (*a->cells[c].rho != *b->cells[c].rho) return *a->cells[c].rho > *b->cells[c].rho;
      return a->scorer_name < b->scorer_name;
    });
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      const bool tied = i > 0 && *ranked[i]->cells[c].rho == *ranked[i - 1]->cells[c].rho;
      ranked[i]->cells[c].rank = tied ? *ranked[i - 1]->cells[c].rank : i + 1;
    }
  }

  std::stable_sort(table.rows.begin(), table.rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
    const auto& ra = a.cells.front().rank;
    const auto& rb = b.cells.front().rank;
    if (ra.has_value() != rb.has_value()) return ra.has_value();
    if (ra && *ra != *rb) return *ra < *rb;
    return a.scorer_name < b.scorer_name;
  });
  return table;
}

// --- serialization ---------------------------------------------------------

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json irr_json(const std::optional<IrrSummary>& irr) {
  if (!irr) return nullptr;
  return {{"alpha", optional_number(irr->alpha)},
          {"rho_mean_pairwise", optional_number(irr->rho_mean_pairwise)},
          {"items", irr->items}};
}

std::string cell_text(const std::optional<double>& v) { return v ? text::format_double(*v) : "NA"; }

}  // namespace

json to_json(const DistributionDiagnostics& diag) {
  json bins = json::array();
  for (const auto& b : diag.histogram) bins.push_back({b.left, b.right, b.count});
  return {{"n", diag.n},
          {"min", diag.min},
          {"max", diag.max},
          {"n_distinct", diag.n_distinct},
          {"mass_at_zero", diag.mass_at_zero},
          {"mass_at_extremes", diag.mass_at_extremes},
          {"trimodality_index", diag.trimodality_index},
          {"histogram", bins}};
}

json to_json(const EvaluationReport& report) {
  json slices = json::array();
  for (const auto& s : report.slices) {
    json j = {{"key", s.key},
              {"value", s.value},
              {"n", s.n},
              {"spearman_rho", optional_number(s.spearman_rho)},
              {"irr", irr_json(s.irr)}};
    if (!s.note.empty()) j["note"] = s.note;
    slices.push_back(std::move(j));
  }
  json dist = json::object();
  for (const auto& [name, d] : report.distribution) dist[name] = to_json(d);
  json out = {{"scorer", report.scorer_name},
              {"gold", report.gold_name},
              {"encoder", report.encoder},
              {"slices", slices},
              {"irr", irr_json(report.irr)},
              {"distribution", dist},
              {"leaked_ids", report.leaked_ids}};
  if (!report.watermark.empty()) out["watermark"] = report.watermark;
  return out;
}

json to_json(const ComparisonTable& table) {
  json rows = json::array();
  for (const auto& row : table.rows) {
    json cells = json::object();
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const auto& cell = row.cells[c];
      cells[table.columns[c]] = {{"spearman_rho", optional_number(cell.rho)},
                                 {"n", cell.n},
                                 {"rank", cell.rank ? json(*cell.rank) : json(nullptr)}};
    }
    rows.push_back({{"scorer", row.scorer_name}, {"slices", cells}});
  }
  json irr = json::object();
  for (std::size_t c = 0; c < table.columns.size(); ++c) irr[table.columns[c]] = irr_json(table.irr[c]);
  json out = {{"columns", table.columns}, {"rows", rows}, {"irr", irr}};
  if (!table.watermark.empty()) out["watermark"] = table.watermark;
  return out;
}

void write_report_tsv(std::ostream& out, const EvaluationReport& report) {
  if (!report.watermark.empty()) out << "# " << report.watermark << '\n';
  out << "row";
  for (const auto& s : report.slices) out << '\t' << s.column_name();
  out << "\nn";
  for (const auto& s : report.slices) out << '\t' << s.n;
  out << "\nirr_rho";
  for (const auto& s : report.slices) out << '\t' << cell_text(s.irr ? s.irr->rho_mean_pairwise : std::nullopt);
  out << "\nirr_alpha";
  for (const auto& s : report.slices) out << '\t' << cell_text(s.irr ? s.irr->alpha : std::nullopt);
  out << '\n' << report.scorer_name;
  for (const auto& s : report.slices) out << '\t' << cell_text(s.spearman_rho);
  out << '\n';
}

void write_comparison_tsv(std::ostream& out, const ComparisonTable& table) {
  if (!table.watermark.empty()) out << "# " << table.watermark << '\n';
  out << "scorer";
  for (const auto& c : table.columns) out << '\t' << c << '\t' << c << "_rank";
  out << "\nirr_rho";
  for (const auto& irr : table.irr) out << '\t' << cell_text(irr ? irr->rho_mean_pairwise : std::nullopt) << "\t-";
  out << "\nirr_alpha";
  for (const auto& irr : table.irr) out << '\t' << cell_text(irr ? irr->alpha : std::nullopt) << "\t-";
  out << '\n';
  for (const auto& row : table.rows) {
    out << row.scorer_name;
    for (const auto& cell : row.cells) {
      out << '\t' << cell_text(cell.rho) << '\t' << (cell.rank ? std::to_string(*cell.rank) : "NA");
    }
    out << '\n';
  }
}

void write_histogram_tsv(std::ostream& out, const DistributionDiagnostics& diag) {
  out << "bin_left\tbin_right\tcount\n";
  for (const auto& b : diag.histogram) {
    out << text::format_double(b.left) << '\t' << text::format_double(b.right) << '\t' << b.count << '\n';
  }
}

}  // namespace cvp

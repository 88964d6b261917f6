#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "cvp/baselines.hpp"
#include "cvp/error.hpp"
#include "cvp/evaluation.hpp"
#include "cvp/geometry.hpp"
#include "support/oracles.hpp"

using cvp::ErrorKind;
using cvp::EvaluationOptions;
using cvp::LabeledSentence;
using cvp::ScoreSet;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const cvp::Error& e) {
    return e.kind();
  }
  FAIL("expected a cvp::Error");
  return ErrorKind::Internal;
}

// 30 sentences over two genres and three sources, two or three annotators each.
std::vector<LabeledSentence> small_corpus() {
  std::vector<LabeledSentence> out;
  cvp::NormalSource rng(404);
  for (int i = 0; i < 30; ++i) {
    LabeledSentence s;
    s.id = "t" + std::to_string(100 + i);
    s.text = "sentence " + std::to_string(i);
    const double base = 1.0 + 8.0 * ((i * 7) % 30) / 29.0;
    const int raters = i % 4 == 0 ? 3 : 2;
    double sum = 0;
    for (int r = 0; r < raters; ++r) {
      const double v = std::clamp(std::round(base + rng.next()), 1.0, 9.0);
      s.ratings.push_back(v);
      sum += v;
    }
    s.mean_rating = sum / raters;
    s.genre = i % 2 ? "prose" : "poetry";
    s.language = "en";
    s.source = "src" + std::to_string(i % 3);
    out.push_back(std::move(s));
  }
  return out;
}

ScoreSet gold_like(const std::vector<LabeledSentence>& c, std::string name, double sign) {
  ScoreSet s{std::move(name), {}};
  for (const auto& x : c) s.entries.push_back({x.id, sign * *x.mean_rating});
  return s;
}

EvaluationOptions sliced() {
  EvaluationOptions o;
  o.slice_keys = {"genre", "source"};
  return o;
}

}  // namespace

TEST_SUITE("evaluation") {
  TEST_CASE("gold against itself is 1 on every slice, reversed gold is -1") {
    const auto corpus = small_corpus();
    const auto self = cvp::evaluate(corpus, gold_like(corpus, "self", 1.0), sliced());
    REQUIRE(self.slices.size() == 1 + 2 + 3);
    for (const auto& s : self.slices) {
      CAPTURE(s.column_name());
      REQUIRE(s.spearman_rho);
      CHECK(*s.spearman_rho == doctest::Approx(1.0).epsilon(1e-15));
    }
    const auto rev = cvp::evaluate(corpus, gold_like(corpus, "rev", -1.0), sliced());
    for (const auto& s : rev.slices) CHECK(*s.spearman_rho == doctest::Approx(-1.0).epsilon(1e-15));
  }

  TEST_CASE("slice layout and sizes") {
    const auto corpus = small_corpus();
    auto scores = gold_like(corpus, "s", 1.0);
    scores.entries.erase(scores.entries.begin());  // t100: poetry, src0
    scores.entries.push_back({"not_in_corpus", 3.0});
    const auto r = cvp::evaluate(corpus, scores, sliced());
    REQUIRE(r.slices.size() == 6);
    CHECK(r.slices[0].column_name() == "all");
    CHECK(r.slices[0].n == 29);
    CHECK(r.slices[1].column_name() == "genre=poetry");
    CHECK(r.slices[1].n == 14);
    CHECK(r.slices[2].column_name() == "genre=prose");
    CHECK(r.slices[2].n == 15);
    CHECK(r.slices[3].column_name() == "source=src0");
    CHECK(r.slices[3].n == 9);
    CHECK(r.slices[4].n == 10);
    CHECK(r.slices[5].n == 10);
    // slice n equals ids present in both scores and gold for that slice
    for (const auto& s : r.slices) {
      std::size_t expected = 0;
      for (const auto& x : corpus) {
        const bool in_slice = s.key == "all" || x.tag(s.key) == s.value;
        const bool scored = std::any_of(scores.entries.begin(), scores.entries.end(),
                                        [&](const auto& e) { return e.id == x.id; });
        expected += in_slice && scored && x.mean_rating.has_value();
      }
      CHECK(s.n == expected);
    }
    REQUIRE(r.distribution.size() == 2);
    CHECK(r.distribution[0].first == "s");
    CHECK(r.distribution[1].first == "gold");
    CHECK(r.distribution[0].second.n == 29);
  }

  TEST_CASE("annotator agreement is attached per slice") {
    const auto corpus = small_corpus();
    const auto r = cvp::evaluate(corpus, gold_like(corpus, "s", 1.0), sliced());
    REQUIRE(r.irr);
    REQUIRE(r.irr->alpha);
    CHECK(*r.irr->alpha <= 1.0);
    CHECK(*r.irr->alpha > 0.5);
    CHECK(r.irr->items == 30);
    REQUIRE(r.irr->rho_mean_pairwise);
    // equals alpha computed directly on the rating matrix
    std::vector<std::vector<std::optional<double>>> rows;
    for (const auto& s : corpus) {
      std::vector<std::optional<double>> row(3);
      for (std::size_t k = 0; k < s.ratings.size(); ++k) row[k] = s.ratings[k];
      rows.push_back(row);
    }
    CHECK(std::abs(*r.irr->alpha - oracle::alpha_coincidence(rows, false)) <= 1e-12);
  }

  TEST_CASE("unrated sentences and restrict_to") {
    auto corpus = small_corpus();
    corpus[3].mean_rating.reset();
    corpus[3].ratings.clear();
    auto opts = sliced();
    opts.restrict_to = std::unordered_set<std::string>{"t101", "t102", "t103", "t104", "t105"};
    const auto r = cvp::evaluate(corpus, gold_like(small_corpus(), "s", 1.0), opts);
    CHECK(r.slices[0].n == 4);
  }

  TEST_CASE("degenerate slices carry a note instead of a correlation") {
    auto corpus = small_corpus();
    auto scores = gold_like(corpus, "s", 1.0);
    scores.entries.resize(4);  // t100..t103: sources 0,1,2,0
    const auto r = cvp::evaluate(corpus, scores, sliced());
    const auto& src1 = *std::find_if(r.slices.begin(), r.slices.end(),
                                     [](const auto& s) { return s.column_name() == "source=src1"; });
    CHECK(src1.n == 1);
    CHECK_FALSE(src1.spearman_rho);
    CHECK(src1.note == "TooFewPoints");
  }

  TEST_CASE("leakage is refused unless overridden, then watermarked") {
    const auto corpus = small_corpus();
    auto opts = sliced();
    opts.concept_ids = {"t105", "t106", "unrelated"};
    try {
      cvp::evaluate(corpus, gold_like(corpus, "s", 1.0), opts);
      FAIL("expected Leakage");
    } catch (const cvp::Error& e) {
      CHECK(e.kind() == ErrorKind::Leakage);
      CHECK(std::string(e.what()).find("t105") != std::string::npos);
    }
    opts.allow_leakage = true;
    const auto r = cvp::evaluate(corpus, gold_like(corpus, "s", 1.0), opts);
    CHECK(r.leaked_ids == 2);
    CHECK(r.watermark.find("CONTAMINATED") == 0);
    CHECK(cvp::to_json(r).at("watermark") == r.watermark);
    std::ostringstream tsv;
    cvp::write_report_tsv(tsv, r);
    CHECK(tsv.str().rfind("# CONTAMINATED", 0) == 0);

    // restricting to the test side makes the guard quiet
    opts.allow_leakage = false;
    opts.restrict_to = std::unordered_set<std::string>{"t100", "t101", "t102"};
    CHECK_NOTHROW(cvp::evaluate(corpus, gold_like(corpus, "s", 1.0), opts));
  }

  TEST_CASE("input validation") {
    const auto corpus = small_corpus();
    auto opts = sliced();
    opts.slice_keys = {"author"};
    CHECK(kind_of([&] { cvp::evaluate(corpus, gold_like(corpus, "s", 1.0), opts); }) ==
          ErrorKind::InvalidArgument);
    ScoreSet dup{"d", {{"t100", 1}, {"t100", 2}}};
    CHECK(kind_of([&] { cvp::evaluate(corpus, dup, sliced()); }) == ErrorKind::DuplicateId);
  }

  TEST_CASE("report serialization shapes") {
    const auto corpus = small_corpus();
    const auto r = cvp::evaluate(corpus, gold_like(corpus, "mine", 1.0), sliced());
    const auto j = cvp::to_json(r);
    CHECK(j.at("scorer") == "mine");
    CHECK(j.at("slices").size() == 6);
    CHECK(j.at("slices")[0].at("n") == 30);
    CHECK(j.at("distribution").contains("mine"));
    CHECK(j.at("distribution").contains("gold"));
    CHECK_FALSE(j.contains("watermark"));

    std::ostringstream tsv;
    cvp::write_report_tsv(tsv, r);
    std::istringstream lines(tsv.str());
    std::string line;
    std::vector<std::string> first_cols;
    int rows = 0;
    while (std::getline(lines, line)) {
      ++rows;
      CHECK(std::count(line.begin(), line.end(), '\t') == 6);
      first_cols.push_back(line.substr(0, line.find('\t')));
    }
    CHECK(first_cols == std::vector<std::string>{"row", "n", "irr_rho", "irr_alpha", "mine"});
    CHECK(tsv.str().rfind("row\tall\tgenre=poetry\tgenre=prose\tsource=src0", 0) == 0);

    std::ostringstream hist;
    cvp::write_histogram_tsv(hist, r.distribution[0].second);
    CHECK(hist.str().rfind("bin_left\tbin_right\tcount\n", 0) == 0);
  }

  TEST_CASE("compare: ranks, ties and ordering") {
    const auto corpus = small_corpus();
    std::vector<ScoreSet> scorers{gold_like(corpus, "zeta", 1.0), gold_like(corpus, "reverse", -1.0),
                                  gold_like(corpus, "alpha", 1.0)};
    // a noisy scorer in between
    ScoreSet noisy{"mid", {}};
    cvp::NormalSource rng(1);
    for (const auto& s : corpus) noisy.entries.push_back({s.id, *s.mean_rating + 2.0 * rng.next()});
    scorers.push_back(noisy);

    const auto t = cvp::compare_scorers(corpus, scorers, sliced());
    REQUIRE(t.columns.size() == 6);
    CHECK(t.columns[0] == "all");
    REQUIRE(t.rows.size() == 4);
    CHECK(t.rows[0].scorer_name == "alpha");
    CHECK(t.rows[1].scorer_name == "zeta");
    CHECK(t.rows[2].scorer_name == "mid");
    CHECK(t.rows[3].scorer_name == "reverse");
    CHECK(t.rows[0].cells[0].rank == 1);
    CHECK(t.rows[1].cells[0].rank == 1);
    CHECK(t.rows[2].cells[0].rank == 3);
    CHECK(t.rows[3].cells[0].rank == 4);
    for (const auto& row : t.rows) CHECK(row.cells[0].n == 30);

    // composed from evaluate
    const auto single = cvp::evaluate(corpus, noisy, sliced());
    for (std::size_t c = 0; c < t.columns.size(); ++c) CHECK(t.rows[2].cells[c].rho == single.slices[c].spearman_rho);

    std::ostringstream tsv;
    cvp::write_comparison_tsv(tsv, t);
    CHECK(tsv.str().rfind("scorer\tall\tall_rank\tgenre=poetry\tgenre=poetry_rank", 0) == 0);
    CHECK(tsv.str().find("\nalpha\t1\t1\t") != std::string::npos);
    const auto j = cvp::to_json(t);
    CHECK(j.at("rows")[3].at("scorer") == "reverse");
    CHECK(j.at("rows")[3].at("slices").at("all").at("rank") == 4);

    // order of input scorers does not matter
    std::reverse(scorers.begin(), scorers.end());
    CHECK(cvp::to_json(cvp::compare_scorers(corpus, scorers, sliced())) == j);
  }

  TEST_CASE("converted classifier scores are more tri-modal than projections") {
    // Sentences embedded around a sentiment direction; a confident 3-class
    // classifier sees the same sentences.
    cvp::NormalSource rng(909);
    std::mt19937_64 engine(910);
    const std::size_t n = 300, d = 12;
    const auto axis = gen::vec(rng, d);
    std::vector<cvp::EmbeddingRecord> pos, neg, all;
    ScoreSet converted{"classifier", {}};
    for (std::size_t i = 0; i < n; ++i) {
      const double t = -1.0 + 2.0 * cvp::uniform01(engine);
      cvp::EmbeddingRecord r{"e" + std::to_string(i), gen::vec(rng, d)};
      for (std::size_t k = 0; k < d; ++k) r.vector[k] += 3.0 * t * axis[k];
      if (t > 0.5) pos.push_back(r);
      if (t < -0.5) neg.push_back(r);
      const auto label = t > 0.33 ? cvp::Polarity::Positive : t < -0.33 ? cvp::Polarity::Negative : cvp::Polarity::Neutral;
      converted.entries.push_back({r.id, cvp::convert_confidence({r.id, label, 0.9 + 0.1 * cvp::uniform01(engine)})});
      all.push_back(std::move(r));
    }
    const auto projected = cvp::project_batch(all, cvp::fit_concept_vector(pos, neg), "projection");
    const cvp::DiagnosticsParams params{0.02, 0.05, 50};
    const auto dc = cvp::distribution_diagnostics(converted.scores(), params);
    const auto dp = cvp::distribution_diagnostics(projected.scores(), params);

    // counting oracle for the converted set
    const auto s = converted.scores();
    const double lo = *std::min_element(s.begin(), s.end()), hi = *std::max_element(s.begin(), s.end());
    std::size_t in_zone = 0;
    for (double v : s) {
      in_zone += std::abs(v) <= 0.02 * (hi - lo) || v <= lo + 0.05 * (hi - lo) || v >= hi - 0.05 * (hi - lo);
    }
    CHECK(dc.trimodality_index == doctest::Approx(static_cast<double>(in_zone) / n));
    CHECK(dc.trimodality_index > dp.trimodality_index);
    CHECK(dp.n_distinct == n);
  }
}

#include "cvp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cvp/error.hpp"
#include "cvp/simd/kernels.hpp"

namespace cvp {
namespace {

constexpr std::size_t kPairwiseBlock = 8;

void pairwise_sum_into(std::span<const EmbeddingRecord* const> records, std::span<double> out) {
  const auto& k = simd::active();
  if (records.size() <= kPairwiseBlock) {
    for (const EmbeddingRecord* r : records) k.add(out.data(), r->vector.data(), out.size());
    return;
  }
  const std::size_t half = records.size() / 2;
  pairwise_sum_into(records.first(half), out);
  std::vector<double> right(out.size(), 0.0);
  pairwise_sum_into(records.subspan(half), right);
  k.add(out.data(), right.data(), out.size());
}

std::vector<const EmbeddingRecord*> sorted_class(std::span<const EmbeddingRecord> records,
                                                 const char* class_name) {
  std::vector<const EmbeddingRecord*> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(&r);
  std::sort(out.begin(), out.end(),
            [](const EmbeddingRecord* a, const EmbeddingRecord* b) { return a->id < b->id; });
  auto dup = std::adjacent_find(out.begin(), out.end(), [](const auto* a, const auto* b) {
    return a->id == b->id;
  });
  if (dup != out.end()) {
    throw Error(ErrorKind::DuplicateId,
                std::string(class_name) + " exemplars repeat id '" + (*dup)->id + "'");
  }
  return out;
}

double norm2(std::span<const double> v) {
  return std::sqrt(simd::active().dot(v.data(), v.data(), v.size()));
}

}  // namespace

std::size_t check_embedding_set(std::span<const EmbeddingRecord> records) {
  if (records.empty()) return 0;
  const std::size_t d = records.front().dimension();
  if (d == 0) {
    throw Error(ErrorKind::DimensionMismatch, "embedding '" + records.front().id + "' is empty");
  }
  for (const auto& r : records) {
    if (r.dimension() != d) {
      throw Error(ErrorKind::DimensionMismatch,
                  "embedding '" + r.id + "' has dimension " + std::to_string(r.dimension()) +
                      ", expected " + std::to_string(d));
    }
    for (double x : r.vector) {
      if (!std::isfinite(x)) {
        throw Error(ErrorKind::NonFinite, "embedding '" + r.id + "' has a non-finite component");
      }
    }
  }
  return d;
}

std::vector<double> pairwise_mean(std::span<const EmbeddingRecord* const> records) {
  if (records.empty()) throw Error(ErrorKind::EmptyClass, "mean of no records");
  const std::size_t d = records.front()->dimension();
  std::vector<double> sum(d, 0.0);
  pairwise_sum_into(records, sum);
  simd::active().divide(sum.data(), static_cast<double>(records.size()), d);
  return sum;
}

ConceptVector fit_concept_vector(std::span<const EmbeddingRecord> positives,
                                 std::span<const EmbeddingRecord> negatives) {
  if (positives.empty()) throw Error(ErrorKind::EmptyClass, "no positive exemplars");
  if (negatives.empty()) throw Error(ErrorKind::EmptyClass, "no negative exemplars");
  const std::size_t d_pos = check_embedding_set(positives);
  const std::size_t d_neg = check_embedding_set(negatives);
  if (d_pos != d_neg) {
    throw Error(ErrorKind::DimensionMismatch, "positive exemplars have dimension " +
                                                  std::to_string(d_pos) + ", negative " +
                                                  std::to_string(d_neg));
  }

  const auto pos = sorted_class(positives, "positive");
  const auto neg = sorted_class(negatives, "negative");
  const std::vector<double> mean_pos = pairwise_mean(pos);
  const std::vector<double> mean_neg = pairwise_mean(neg);

  const auto& k = simd::active();
  std::vector<double> direction(d_pos);
  k.sub(direction.data(), mean_pos.data(), mean_neg.data(), d_pos);
  const double separation = norm2(direction);
  if (!std::isfinite(separation)) {
    throw Error(ErrorKind::NonFinite, "mean difference norm overflowed");
  }
  if (!(separation >= kDegenerateSeparation)) {
    throw Error(ErrorKind::DegenerateDirection,
                "class means coincide (separation " + std::to_string(separation) + ")");
  }
  k.divide(direction.data(), separation, d_pos);
  return ConceptVector(std::move(direction), pos.size(), neg.size(), separation);
}

ConceptVector ConceptVector::from_parts(std::vector<double> direction, std::uint64_t n_positive,
                                        std::uint64_t n_negative, double separation) {
  if (direction.empty()) throw Error(ErrorKind::DimensionMismatch, "concept vector has dimension 0");
  for (double x : direction) {
    if (!std::isfinite(x)) throw Error(ErrorKind::NonFinite, "concept vector has a non-finite component");
  }
  const double n = norm2(direction);
  if (std::abs(n - 1.0) > 1e-9) {
    throw Error(ErrorKind::Malformed, "concept vector is not unit-norm (norm " + std::to_string(n) + ")");
  }
  if (!std::isfinite(separation) || !(separation > 0.0)) {
    throw Error(ErrorKind::DegenerateDirection, "concept vector separation must be positive");
  }
  return ConceptVector(std::move(direction), n_positive, n_negative, separation);
}

ConceptVector ConceptVector::negated() const {
  std::vector<double> flipped(direction_.size());
  std::transform(direction_.begin(), direction_.end(), flipped.begin(), [](double x) { return -x; });
  return ConceptVector(std::move(flipped), n_negative_, n_positive_, separation_);
}

double project(std::span<const double> embedding, const ConceptVector& cv) {
  if (embedding.size() != cv.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "embedding dimension " +
                                                  std::to_string(embedding.size()) +
                                                  " vs concept dimension " +
                                                  std::to_string(cv.dimension()));
  }
  return simd::active().dot(embedding.data(), cv.direction().data(), embedding.size());
}

double project(const EmbeddingRecord& embedding, const ConceptVector& cv) {
  if (embedding.dimension() != cv.dimension()) {
    throw Error(ErrorKind::DimensionMismatch,
                "embedding '" + embedding.id + "' has dimension " +
                    std::to_string(embedding.dimension()) + ", concept vector " +
                    std::to_string(cv.dimension()));
  }
  return project(std::span<const double>(embedding.vector), cv);
}

ScoreSet project_batch(std::span<const EmbeddingRecord> embeddings, const ConceptVector& cv,
                       std::string scorer_name) {
  ScoreSet out;
  out.scorer_name = std::move(scorer_name);
  out.entries.reserve(embeddings.size());
  for (const auto& e : embeddings) out.entries.push_back({e.id, project(e, cv)});
  return out;
}

}  // namespace cvp

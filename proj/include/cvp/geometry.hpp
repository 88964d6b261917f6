#pragma once

// Concept vector fitting and projection.
//
// A concept vector is the unit direction pointing from the mean embedding of
// negative exemplars to the mean embedding of positive exemplars. Projecting
// an embedding onto it (a dot product) yields an unbounded continuous score.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cvp/score_set.hpp"

namespace cvp {

struct EmbeddingRecord {
  std::string id;
  std::vector<double> vector;

  std::size_t dimension() const { return vector.size(); }
};

// Fitted direction plus fit metadata. Immutable once built.
class ConceptVector {
 public:
  // Rebuilds a vector from stored parts, e.g. a file. Throws if the direction
  // is not unit-norm within 1e-9, has non-finite entries, or separation <= 0.
  static ConceptVector from_parts(std::vector<double> direction, std::uint64_t n_positive,
                                  std::uint64_t n_negative, double separation);

  std::span<const double> direction() const { return direction_; }
  std::size_t dimension() const { return direction_.size(); }
  std::uint64_t n_positive_exemplars() const { return n_positive_; }
  std::uint64_t n_negative_exemplars() const { return n_negative_; }
  // Euclidean norm of the un-normalized mean difference.
  double separation() const { return separation_; }

  // Same fit with the classes swapped.
  ConceptVector negated() const;

 private:
  ConceptVector(std::vector<double> direction, std::uint64_t n_positive, std::uint64_t n_negative,
                double separation)
      : direction_(std::move(direction)),
        n_positive_(n_positive),
        n_negative_(n_negative),
        separation_(separation) {}

  friend ConceptVector fit_concept_vector(std::span<const EmbeddingRecord>,
                                          std::span<const EmbeddingRecord>);

  std::vector<double> direction_;
  std::uint64_t n_positive_ = 0;
  std::uint64_t n_negative_ = 0;
  double separation_ = 0.0;
};

inline constexpr double kDegenerateSeparation = 1e-12;

// Class means are accumulated over records sorted by id, with pairwise
// summation, so the result does not depend on input order.
// Throws EmptyClass, DimensionMismatch, NonFinite, DuplicateId (within one
// class) and DegenerateDirection (separation below 1e-12).
ConceptVector fit_concept_vector(std::span<const EmbeddingRecord> positives,
                                 std::span<const EmbeddingRecord> negatives);

// Component-wise arithmetic mean, summed in the given order with pairwise
// summation. Exposed for the fit and for callers that want class centroids.
std::vector<double> pairwise_mean(std::span<const EmbeddingRecord* const> records);

double project(std::span<const double> embedding, const ConceptVector& cv);
double project(const EmbeddingRecord& embedding, const ConceptVector& cv);

// Scores in input order; each equals project() on that element exactly.
// A dimension mismatch names the first offending id.
ScoreSet project_batch(std::span<const EmbeddingRecord> embeddings, const ConceptVector& cv,
                       std::string scorer_name = "projection");

// Throws DimensionMismatch / NonFinite if the records are not a valid set of
// common dimension. Returns that dimension (0 for an empty set).
std::size_t check_embedding_set(std::span<const EmbeddingRecord> records);

}  // namespace cvp

#pragma once

// Embedding inputs: the on-disk embedding and concept-vector formats, the join
// of embeddings onto a corpus, and a client for a local encoding service.
//
// Embedding file, binary form (all integers little-endian):
//   bytes 0-3   magic "CVPE"
//   u32         format_version (1)
//   u32         dimension d (> 0)
//   u32         dtype (1 = float32, 2 = float64)
//   u64         count n
//   u32         encoder name length L, then L bytes of UTF-8
//   n records:  u32 id length K, K bytes of UTF-8 id, d little-endian IEEE-754 values
//
// JSON-lines form: a header object
//   {"format_version":1,"dimension":d,"count":n,"encoder":"...","dtype":"float64"}
// followed by n lines {"id":"...","vector":[...]}.
//
// Concept vector file (binary):
//   magic "CVPV", u32 version (1), u32 dimension d, u64 n_positive,
//   u64 n_negative, f64 separation, u32 encoder length + bytes, d f64 values.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cvp/corpus.hpp"
#include "cvp/geometry.hpp"

namespace cvp {

enum class Dtype : std::uint32_t { Float32 = 1, Float64 = 2 };

std::string_view to_string(Dtype dtype);

inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;

struct EmbeddingFileHeader {
  std::uint32_t format_version = kEmbeddingFormatVersion;
  std::uint32_t dimension = 0;
  std::uint64_t count = 0;
  std::string encoder_name;
  Dtype dtype = Dtype::Float64;
};

struct EmbeddingSet {
  EmbeddingFileHeader header;
  std::vector<EmbeddingRecord> records;  // file order, widened to double
};

// Detects the binary or JSON-lines form. Throws BadHeader, TruncatedFile,
// DimensionMismatch (naming the record), NonFinite, DuplicateId.
EmbeddingSet read_embeddings(std::istream& in);
EmbeddingSet read_embeddings(const std::filesystem::path& path);

// header.count is taken from records.size(); header.dimension must match every
// record. Float32 output rounds each value to nearest.
void write_embeddings(std::ostream& out, const EmbeddingFileHeader& header,
                      std::span<const EmbeddingRecord> records);
void write_embeddings(const std::filesystem::path& path, const EmbeddingFileHeader& header,
                      std::span<const EmbeddingRecord> records);
void write_embeddings_jsonl(std::ostream& out, const EmbeddingFileHeader& header,
                            std::span<const EmbeddingRecord> records);

struct StoredConceptVector {
  ConceptVector vector;
  std::string encoder_name;
};

void write_concept_vector(std::ostream& out, const ConceptVector& cv, std::string_view encoder_name);
void write_concept_vector(const std::filesystem::path& path, const ConceptVector& cv,
                          std::string_view encoder_name);
// Throws BadHeader, TruncatedFile, plus ConceptVector::from_parts errors.
StoredConceptVector read_concept_vector(std::istream& in);
StoredConceptVector read_concept_vector(const std::filesystem::path& path);

struct AlignedPair {
  std::size_t sentence = 0;   // index into the corpus
  std::size_t embedding = 0;  // index into the embeddings
};

struct Alignment {
  std::vector<AlignedPair> pairs;               // corpus order
  std::vector<std::string> missing_corpus;      // corpus ids with no embedding, corpus order
  std::vector<std::string> missing_embeddings;  // embedding ids with no sentence, file order
};

// Inner join on id. Throws NoOverlap when no id matches and DuplicateId when
// an id repeats on either side.
Alignment align(std::span<const LabeledSentence> corpus, std::span<const EmbeddingRecord> embeddings);

// Encoding service: POST <url> with a JSON array of {"id","text"}; the reply
// is a JSON array of {"id","vector"} in the same order.
struct EncoderEndpoint {
  std::string url;  // http://host:port/path
  std::size_t batch_size = 32;
  std::size_t max_attempts = 3;
  std::size_t max_parallel = 1;  // batches in flight
  std::chrono::milliseconds initial_backoff{100};
  std::chrono::milliseconds timeout{30000};

  // Reads CVP_ENCODER_URL; nullopt when unset or empty.
  static std::optional<EncoderEndpoint> from_env();
};

struct SentenceText {
  std::string id;
  std::string text;
};

// One record per input, in input order. Connection failures and 5xx replies
// are retried with exponential backoff. Throws EndpointUnreachable when
// attempts run out, ProtocolError on a 4xx or malformed reply, and
// DimensionDrift when replies disagree on the dimension.
std::vector<EmbeddingRecord> request_embeddings(std::span<const SentenceText> sentences,
                                                const EncoderEndpoint& endpoint);

}  // namespace cvp

#include <unordered_map>
#include <unordered_set>

#include "cvp/error.hpp"
#include "cvp/providers.hpp"

namespace cvp {

Alignment align(std::span<const LabeledSentence> corpus, std::span<const EmbeddingRecord> embeddings) {
  std::unordered_map<std::string_view, std::size_t> by_id;
  by_id.reserve(embeddings.size());
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    if (!by_id.emplace(embeddings[i].id, i).second) {
      throw Error(ErrorKind::DuplicateId, "embedding id '" + embeddings[i].id + "' repeats");
    }
  }

  std::unordered_set<std::string_view> corpus_ids;
  corpus_ids.reserve(corpus.size());
  for (const auto& s : corpus) {
    if (!corpus_ids.insert(s.id).second) throw Error(ErrorKind::DuplicateId, "corpus id '" + s.id + "' repeats");
  }

  Alignment out;
  std::unordered_set<std::size_t> used;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    auto it = by_id.find(corpus[s].id);
    if (it == by_id.end()) {
      out.missing_corpus.push_back(corpus[s].id);
    } else {
      out.pairs.push_back({s, it->second});
      used.insert(it->second);
    }
  }
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    if (!used.count(i)) out.missing_embeddings.push_back(embeddings[i].id);
  }
  if (out.pairs.empty()) {
    throw Error(ErrorKind::NoOverlap, "no corpus id has an embedding (" + std::to_string(corpus.size()) +
                                          " sentences, " + std::to_string(embeddings.size()) + " embeddings)");
  }
  return out;
}

}  // namespace cvp

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "cvp/error.hpp"
#include "cvp/providers.hpp"

namespace cvp {

using nlohmann::json;

std::optional<EncoderEndpoint> EncoderEndpoint::from_env() {
  const char* url = std::getenv("CVP_ENCODER_URL");
  if (!url || !*url) return std::nullopt;
  EncoderEndpoint ep;
  ep.url = url;
  return ep;
}

namespace {

struct ParsedUrl {
  std::string base;  // scheme://host:port
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.compare(0, scheme_end, "http") != 0) {
    throw Error(ErrorKind::InvalidArgument, "encoder url must start with http://, got '" + url + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::vector<EmbeddingRecord> decode_reply(const std::string& body, std::span<const SentenceText> batch) {
  json reply;
  try {
    reply = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ProtocolError, std::string("encoder reply is not JSON: ") + e.what());
  }
  if (!reply.is_array()) throw Error(ErrorKind::ProtocolError, "encoder reply is not a JSON array");
  if (reply.size() != batch.size()) {
    throw Error(ErrorKind::ProtocolError, "encoder returned " + std::to_string(reply.size()) + " vectors for " +
                                              std::to_string(batch.size()) + " sentences");
  }
  std::vector<EmbeddingRecord> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& item = reply[i];
    if (!item.is_object() || !item.contains("id") || !item.contains("vector") || !item["id"].is_string() ||
        !item["vector"].is_array()) {
      throw Error(ErrorKind::ProtocolError, "encoder reply item " + std::to_string(i) + " lacks id or vector");
    }
    EmbeddingRecord r;
    r.id = item["id"].get<std::string>();
    if (r.id != batch[i].id) {
      throw Error(ErrorKind::ProtocolError, "encoder reply out of order: expected '" + batch[i].id + "', got '" +
                                                r.id + "'");
    }
    for (const auto& x : item["vector"]) {
      if (!x.is_number()) throw Error(ErrorKind::ProtocolError, "non-numeric component for '" + r.id + "'");
      const double v = x.get<double>();
      if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "non-finite component for '" + r.id + "'");
      r.vector.push_back(v);
    }
    if (r.vector.empty()) throw Error(ErrorKind::ProtocolError, "empty vector for '" + r.id + "'");
    if (!out.empty() && r.dimension() != out.front().dimension()) {
      throw Error(ErrorKind::DimensionDrift, "vectors within one reply disagree on dimension (" +
                                                 std::to_string(out.front().dimension()) + " vs " +
                                                 std::to_string(r.dimension()) + ")");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<EmbeddingRecord> request_batch(const ParsedUrl& url, const EncoderEndpoint& ep,
                                           std::span<const SentenceText> batch) {
  json payload = json::array();
  for (const auto& s : batch) payload.push_back({{"id", s.id}, {"text", s.text}});
  const std::string body = payload.dump();

  httplib::Client client(url.base);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(ep.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(ep.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  std::string last_failure;
  auto backoff = ep.initial_backoff;
  for (std::size_t attempt = 1; attempt <= ep.max_attempts; ++attempt) {
    auto res = client.Post(url.path, body, "application/json");
    if (res && res->status >= 200 && res->status < 300) return decode_reply(res->body, batch);
    if (res && res->status >= 400 && res->status < 500) {
      throw Error(ErrorKind::ProtocolError, "encoder rejected the request with HTTP " + std::to_string(res->status));
    }
    last_failure = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
    if (attempt < ep.max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw Error(ErrorKind::EndpointUnreachable, "encoder at " + ep.url + " failed after " +
                                                  std::to_string(ep.max_attempts) + " attempts: " + last_failure);
}

}  // namespace

std::vector<EmbeddingRecord> request_embeddings(std::span<const SentenceText> sentences,
                                                const EncoderEndpoint& endpoint) {
  if (sentences.empty()) return {};
  if (endpoint.batch_size == 0 || endpoint.max_attempts == 0 || endpoint.max_parallel == 0) {
    throw Error(ErrorKind::InvalidArgument, "encoder batch size, attempts and parallelism must be positive");
  }
  const ParsedUrl url = parse_url(endpoint.url);
  const std::size_t n_batches = (sentences.size() + endpoint.batch_size - 1) / endpoint.batch_size;
  std::vector<std::vector<EmbeddingRecord>> results(n_batches);
  std::vector<std::exception_ptr> failures(n_batches);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t b = next++; b < n_batches; b = next++) {
      const std::size_t begin = b * endpoint.batch_size;
      const std::size_t len = std::min(endpoint.batch_size, sentences.size() - begin);
      try {
        results[b] = request_batch(url, endpoint, sentences.subspan(begin, len));
      } catch (...) {
        failures[b] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min(endpoint.max_parallel, n_batches);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // report the earliest failing batch so the error does not depend on scheduling
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  std::vector<EmbeddingRecord> out;
  out.reserve(sentences.size());
  const std::size_t d = results.front().front().dimension();
  for (std::size_t b = 0; b < n_batches; ++b) {
    if (results[b].front().dimension() != d) {
      throw Error(ErrorKind::DimensionDrift, "batch " + std::to_string(b) + " returned dimension " +
                                                 std::to_string(results[b].front().dimension()) + ", batch 0 returned " +
                                                 std::to_string(d));
    }
    for (auto& r : results[b]) out.push_back(std::move(r));
  }
  return out;
}

}  // namespace cvp

#include <doctest.h>

#include <atomic>
#include <functional>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "cvp/error.hpp"
#include "cvp/providers.hpp"

using cvp::EncoderEndpoint;
using cvp::ErrorKind;
using cvp::SentenceText;
using nlohmann::json;

namespace {

// Deterministic pseudo-embedding of a text.
std::vector<double> stub_vector(const std::string& text, std::size_t d) {
  std::vector<double> v(d);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) h = (h ^ c) * 1099511628211ULL;
  for (std::size_t k = 0; k < d; ++k) {
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    v[k] = static_cast<double>(h % 2001) / 1000.0 - 1.0;
  }
  return v;
}

// Local encoding service. The handler decides the dimension and status per
// request; the request count is observable.
class StubServer {
 public:
  using Policy = std::function<int(std::size_t request_no, std::size_t& dimension)>;

  explicit StubServer(Policy policy) : policy_(std::move(policy)) {
    server_.Post("/encode", [this](const httplib::Request& req, httplib::Response& res) {
      const std::size_t no = requests_++;
      std::size_t d = 8;
      const int status = policy_(no, d);
      if (status != 200) {
        res.status = status;
        return;
      }
      json in = json::parse(req.body);
      json out = json::array();
      for (const auto& item : in) {
        out.push_back({{"id", item.at("id")}, {"vector", stub_vector(item.at("text").get<std::string>(), d)}});
      }
      res.set_content(out.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  EncoderEndpoint endpoint(std::size_t batch = 32) const {
    EncoderEndpoint ep;
    ep.url = "http://127.0.0.1:" + std::to_string(port_) + "/encode";
    ep.batch_size = batch;
    ep.initial_backoff = std::chrono::milliseconds(1);
    ep.timeout = std::chrono::milliseconds(5000);
    return ep;
  }

  std::size_t requests() const { return requests_; }
  int port() const { return port_; }

 private:
  httplib::Server server_;
  Policy policy_;
  std::atomic<std::size_t> requests_{0};
  int port_ = 0;
  std::thread thread_;
};

std::vector<SentenceText> texts(std::size_t n) {
  std::vector<SentenceText> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"s" + std::to_string(i), "sentence number " + std::to_string(i)});
  return out;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const cvp::Error& e) {
    return e.kind();
  }
  FAIL("expected a cvp::Error");
  return ErrorKind::Internal;
}

}  // namespace

TEST_SUITE("encoder") {
  TEST_CASE("empty input makes no request") {
    StubServer server([](std::size_t, std::size_t&) { return 200; });
    CHECK(cvp::request_embeddings({}, server.endpoint()).empty());
    CHECK(server.requests() == 0);
  }

  TEST_CASE("three sentences give three records of the served dimension") {
    StubServer server([](std::size_t, std::size_t&) { return 200; });
    const auto in = texts(3);
    const auto out = cvp::request_embeddings(in, server.endpoint());
    REQUIRE(out.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(out[i].id == in[i].id);
      CHECK(out[i].vector == stub_vector(in[i].text, 8));
    }
    CHECK(server.requests() == 1);
  }

  TEST_CASE("order is kept across batches, sequential and parallel") {
    StubServer server([](std::size_t, std::size_t&) { return 200; });
    const auto in = texts(100);
    for (std::size_t parallel : {1u, 4u}) {
      auto ep = server.endpoint(7);
      ep.max_parallel = parallel;
      const auto out = cvp::request_embeddings(in, ep);
      REQUIRE(out.size() == 100);
      for (std::size_t i = 0; i < 100; ++i) {
        CHECK(out[i].id == in[i].id);
        CHECK(out[i].vector == stub_vector(in[i].text, 8));
      }
    }
    CHECK(server.requests() == 2 * 15);
  }

  TEST_CASE("batches disagreeing on dimension raise DimensionDrift") {
    StubServer server([](std::size_t no, std::size_t& d) {
      d = no == 0 ? 768 : 512;
      return 200;
    });
    CHECK(kind_of([&] { cvp::request_embeddings(texts(4), server.endpoint(2)); }) == ErrorKind::DimensionDrift);
  }

  TEST_CASE("transient 5xx replies are retried") {
    StubServer server([](std::size_t no, std::size_t&) { return no < 2 ? 503 : 200; });
    const auto out = cvp::request_embeddings(texts(2), server.endpoint());
    CHECK(out.size() == 2);
    CHECK(server.requests() == 3);
  }

  TEST_CASE("persistent 5xx exhausts the attempts") {
    StubServer server([](std::size_t, std::size_t&) { return 500; });
    auto ep = server.endpoint();
    ep.max_attempts = 4;
    CHECK(kind_of([&] { cvp::request_embeddings(texts(1), ep); }) == ErrorKind::EndpointUnreachable);
    CHECK(server.requests() == 4);
  }

  TEST_CASE("4xx is a protocol error and is not retried") {
    StubServer server([](std::size_t, std::size_t&) { return 422; });
    CHECK(kind_of([&] { cvp::request_embeddings(texts(1), server.endpoint()); }) == ErrorKind::ProtocolError);
    CHECK(server.requests() == 1);
  }

  TEST_CASE("malformed replies are protocol errors") {
    httplib::Server server;
    server.Post("/short", [](const httplib::Request&, httplib::Response& res) { res.set_content("[]", "application/json"); });
    server.Post("/text", [](const httplib::Request&, httplib::Response& res) { res.set_content("not json", "text/plain"); });
    server.Post("/swapped", [](const httplib::Request& req, httplib::Response& res) {
      json in = json::parse(req.body), out = json::array();
      for (auto it = in.rbegin(); it != in.rend(); ++it) out.push_back({{"id", (*it)["id"]}, {"vector", {1.0}}});
      res.set_content(out.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    EncoderEndpoint ep;
    ep.initial_backoff = std::chrono::milliseconds(1);
    for (const char* path : {"/short", "/text", "/swapped"}) {
      CAPTURE(path);
      ep.url = "http://127.0.0.1:" + std::to_string(port) + path;
      CHECK(kind_of([&] { cvp::request_embeddings(texts(2), ep); }) == ErrorKind::ProtocolError);
    }
    server.stop();
    t.join();
  }

  TEST_CASE("an unreachable endpoint fails after the configured attempts") {
    int port;
    {
      StubServer closed([](std::size_t, std::size_t&) { return 200; });
      port = closed.port();
    }
    EncoderEndpoint ep;
    ep.url = "http://127.0.0.1:" + std::to_string(port) + "/encode";
    ep.max_attempts = 2;
    ep.initial_backoff = std::chrono::milliseconds(1);
    ep.timeout = std::chrono::milliseconds(500);
    CHECK(kind_of([&] { cvp::request_embeddings(texts(1), ep); }) == ErrorKind::EndpointUnreachable);
  }

  TEST_CASE("endpoint configuration") {
    EncoderEndpoint ep;
    ep.url = "ftp://host/x";
    CHECK(kind_of([&] { cvp::request_embeddings(texts(1), ep); }) == ErrorKind::InvalidArgument);
    ep.url = "http://127.0.0.1:1/x";
    ep.batch_size = 0;
    CHECK(kind_of([&] { cvp::request_embeddings(texts(1), ep); }) == ErrorKind::InvalidArgument);

    ::setenv("CVP_ENCODER_URL", "http://localhost:9999/embed", 1);
    const auto env = EncoderEndpoint::from_env();
    REQUIRE(env);
    CHECK(env->url == "http://localhost:9999/embed");
    ::unsetenv("CVP_ENCODER_URL");
    CHECK_FALSE(EncoderEndpoint::from_env());
  }
}

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "cvp/error.hpp"
#include "cvp/providers.hpp"
#include "cvp/simd/kernels.hpp"
#include "cvp/text/format.hpp"
#include "providers/binary_io.hpp"

namespace cvp {

using nlohmann::json;

std::string_view to_string(Dtype dtype) {
  switch (dtype) {
    case Dtype::Float32: return "float32";
    case Dtype::Float64: return "float64";
  }
  return "?";
}

namespace {

constexpr char kMagic[4] = {'C', 'V', 'P', 'E'};
constexpr std::uint32_t kMaxIdLength = 1u << 16;

Dtype parse_dtype_code(std::uint32_t code) {
  if (code == 1) return Dtype::Float32;
  if (code == 2) return Dtype::Float64;
  throw Error(ErrorKind::BadHeader, "unknown dtype code " + std::to_string(code));
}

Dtype parse_dtype_name(std::string_view name) {
  if (name == "float32") return Dtype::Float32;
  if (name == "float64") return Dtype::Float64;
  throw Error(ErrorKind::BadHeader, "unknown dtype '" + std::string(name) + "'");
}

void read_values(std::istream& in, Dtype dtype, std::vector<double>& out, const std::string& id) {
  const std::size_t d = out.size();
  const std::string what = "vector of '" + id + "'";
  if (dtype == Dtype::Float64) {
    if constexpr (std::endian::native == std::endian::little) {
      binio::get_bytes(in, reinterpret_cast<char*>(out.data()), d * sizeof(double), ErrorKind::TruncatedFile, what);
    } else {
      for (auto& v : out) v = binio::get_f64(in, ErrorKind::TruncatedFile, what);
    }
  } else {
    std::vector<float> narrow(d);
    if constexpr (std::endian::native == std::endian::little) {
      binio::get_bytes(in, reinterpret_cast<char*>(narrow.data()), d * sizeof(float), ErrorKind::TruncatedFile, what);
    } else {
      for (auto& v : narrow) {
        v = std::bit_cast<float>(binio::get_uint<std::uint32_t>(in, ErrorKind::TruncatedFile, what));
      }
    }
    simd::active().widen(out.data(), narrow.data(), d);
  }
  for (double v : out) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "embedding '" + id + "' has a non-finite component");
  }
}

EmbeddingSet read_binary(std::istream& in) {
  EmbeddingSet set;
  char magic[4];
  binio::get_bytes(in, magic, 4, ErrorKind::BadHeader, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorKind::BadHeader, "not an embedding file (bad magic)");
  auto& h = set.header;
  h.format_version = binio::get_uint<std::uint32_t>(in, ErrorKind::BadHeader, "format version");
  if (h.format_version != kEmbeddingFormatVersion) {
    throw Error(ErrorKind::BadHeader, "unsupported format version " + std::to_string(h.format_version));
  }
  h.dimension = binio::get_uint<std::uint32_t>(in, ErrorKind::BadHeader, "dimension");
  if (h.dimension == 0) throw Error(ErrorKind::BadHeader, "dimension must be positive");
  h.dtype = parse_dtype_code(binio::get_uint<std::uint32_t>(in, ErrorKind::BadHeader, "dtype"));
  h.count = binio::get_uint<std::uint64_t>(in, ErrorKind::BadHeader, "count");
  h.encoder_name = binio::get_string(in, ErrorKind::BadHeader, "encoder name");

  std::unordered_set<std::string> seen;
  for (std::uint64_t i = 0; i < h.count; ++i) {
    if (binio::at_eof(in)) {
      throw Error(ErrorKind::TruncatedFile, "header declares " + std::to_string(h.count) + " records, file has " +
                                                std::to_string(i));
    }
    EmbeddingRecord r;
    r.id = binio::get_string(in, ErrorKind::TruncatedFile, "record id", kMaxIdLength);
    if (!seen.insert(r.id).second) throw Error(ErrorKind::DuplicateId, "embedding id '" + r.id + "' repeats");
    r.vector.resize(h.dimension);
    read_values(in, h.dtype, r.vector, r.id);
    set.records.push_back(std::move(r));
  }
  if (!binio::at_eof(in)) {
    throw Error(ErrorKind::BadHeader, "file holds more than the " + std::to_string(h.count) + " declared records");
  }
  return set;
}

EmbeddingSet read_jsonl(std::istream& in) {
  EmbeddingSet set;
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!text::trim(line).empty()) return true;
    }
    return false;
  };
  if (!next_line()) throw Error(ErrorKind::BadHeader, "empty embedding file");
  auto& h = set.header;
  try {
    const json hdr = json::parse(line);
    h.format_version = hdr.at("format_version").get<std::uint32_t>();
    const auto dim = hdr.at("dimension").get<std::int64_t>();
    const auto count = hdr.at("count").get<std::int64_t>();
    if (dim <= 0) throw Error(ErrorKind::BadHeader, "dimension must be positive");
    if (count < 0) throw Error(ErrorKind::BadHeader, "count must be non-negative");
    h.dimension = static_cast<std::uint32_t>(dim);
    h.count = static_cast<std::uint64_t>(count);
    h.encoder_name = hdr.value("encoder", std::string());
    h.dtype = parse_dtype_name(hdr.value("dtype", std::string("float64")));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BadHeader, std::string("embedding header: ") + e.what());
  }
  if (h.format_version != kEmbeddingFormatVersion) {
    throw Error(ErrorKind::BadHeader, "unsupported format version " + std::to_string(h.format_version));
  }

  std::unordered_set<std::string> seen;
  while (next_line()) {
    if (set.records.size() == h.count) {
      throw Error(ErrorKind::BadHeader, "file holds more than the " + std::to_string(h.count) + " declared records");
    }
    EmbeddingRecord r;
    try {
      const json obj = json::parse(line);
      r.id = obj.at("id").get<std::string>();
      const auto& vec = obj.at("vector");
      if (!vec.is_array()) throw Error(ErrorKind::Malformed, "vector is not an array");
      r.vector.reserve(vec.size());
      for (const auto& x : vec) {
        if (!x.is_number()) throw Error(ErrorKind::NonFinite, "embedding '" + r.id + "' has a non-numeric component");
        double v = x.get<double>();
        if (h.dtype == Dtype::Float32) v = static_cast<double>(static_cast<float>(v));
        r.vector.push_back(v);
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::TruncatedFile, "embedding line " + std::to_string(line_no) + ": " + e.what());
    }
    if (r.vector.size() != h.dimension) {
      throw Error(ErrorKind::DimensionMismatch, "embedding '" + r.id + "' has dimension " +
                                                    std::to_string(r.vector.size()) + ", header says " +
                                                    std::to_string(h.dimension));
    }
    for (double v : r.vector) {
      if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "embedding '" + r.id + "' has a non-finite component");
    }
    if (!seen.insert(r.id).second) throw Error(ErrorKind::DuplicateId, "embedding id '" + r.id + "' repeats");
    set.records.push_back(std::move(r));
  }
  if (set.records.size() != h.count) {
    throw Error(ErrorKind::TruncatedFile, "header declares " + std::to_string(h.count) + " records, file has " +
                                              std::to_string(set.records.size()));
  }
  return set;
}

void check_writable(const EmbeddingFileHeader& header, std::span<const EmbeddingRecord> records) {
  if (header.dimension == 0) throw Error(ErrorKind::BadHeader, "dimension must be positive");
  for (const auto& r : records) {
    if (r.dimension() != header.dimension) {
      throw Error(ErrorKind::DimensionMismatch, "embedding '" + r.id + "' has dimension " +
                                                    std::to_string(r.dimension()) + ", header says " +
                                                    std::to_string(header.dimension));
    }
  }
}

}  // namespace

EmbeddingSet read_embeddings(std::istream& in) {
  const int first = in.peek();
  if (first == std::char_traits<char>::eof()) throw Error(ErrorKind::BadHeader, "empty embedding file");
  if (first == '{') return read_jsonl(in);
  return read_binary(in);
}

EmbeddingSet read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open embedding file " + path.string());
  return read_embeddings(in);
}

void write_embeddings(std::ostream& out, const EmbeddingFileHeader& header,
                      std::span<const EmbeddingRecord> records) {
  check_writable(header, records);
  out.write(kMagic, 4);
  binio::put_uint<std::uint32_t>(out, kEmbeddingFormatVersion);
  binio::put_uint<std::uint32_t>(out, header.dimension);
  binio::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(header.dtype));
  binio::put_uint<std::uint64_t>(out, records.size());
  binio::put_string(out, header.encoder_name);
  for (const auto& r : records) {
    binio::put_string(out, r.id);
    if (header.dtype == Dtype::Float64) {
      for (double v : r.vector) binio::put_f64(out, v);
    } else {
      for (double v : r.vector) binio::put_f32(out, static_cast<float>(v));
    }
  }
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingFileHeader& header,
                      std::span<const EmbeddingRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write embedding file " + path.string());
  write_embeddings(out, header, records);
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

void write_embeddings_jsonl(std::ostream& out, const EmbeddingFileHeader& header,
                            std::span<const EmbeddingRecord> records) {
  check_writable(header, records);
  nlohmann::ordered_json hdr = {{"format_version", kEmbeddingFormatVersion},
              {"dimension", header.dimension},
              {"count", records.size()},
              {"encoder", header.encoder_name},
              {"dtype", to_string(header.dtype)}};
  out << hdr.dump() << '\n';
  for (const auto& r : records) {
    out << "{\"id\":" << json(r.id).dump() << ",\"vector\":[";
    for (std::size_t i = 0; i < r.vector.size(); ++i) {
      if (i) out << ',';
      const double v = header.dtype == Dtype::Float32 ? static_cast<float>(r.vector[i]) : r.vector[i];
      out << text::format_double(v);
    }
    out << "]}\n";
  }
}

}  // namespace cvp

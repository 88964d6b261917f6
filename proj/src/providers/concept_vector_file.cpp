#include <cstring>
#include <fstream>

#include "cvp/error.hpp"
#include "cvp/providers.hpp"
#include "providers/binary_io.hpp"

namespace cvp {
namespace {

constexpr char kMagic[4] = {'C', 'V', 'P', 'V'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void write_concept_vector(std::ostream& out, const ConceptVector& cv, std::string_view encoder_name) {
  out.write(kMagic, 4);
  binio::put_uint<std::uint32_t>(out, kVersion);
  binio::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(cv.dimension()));
  binio::put_uint<std::uint64_t>(out, cv.n_positive_exemplars());
  binio::put_uint<std::uint64_t>(out, cv.n_negative_exemplars());
  binio::put_f64(out, cv.separation());
  binio::put_string(out, encoder_name);
  for (double v : cv.direction()) binio::put_f64(out, v);
}

void write_concept_vector(const std::filesystem::path& path, const ConceptVector& cv,
                          std::string_view encoder_name) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write concept vector " + path.string());
  write_concept_vector(out, cv, encoder_name);
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

StoredConceptVector read_concept_vector(std::istream& in) {
  char magic[4];
  binio::get_bytes(in, magic, 4, ErrorKind::BadHeader, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorKind::BadHeader, "not a concept vector file (bad magic)");
  const auto version = binio::get_uint<std::uint32_t>(in, ErrorKind::BadHeader, "version");
  if (version != kVersion) throw Error(ErrorKind::BadHeader, "unsupported version " + std::to_string(version));
  const auto d = binio::get_uint<std::uint32_t>(in, ErrorKind::BadHeader, "dimension");
  if (d == 0) throw Error(ErrorKind::BadHeader, "dimension must be positive");
  const auto n_pos = binio::get_uint<std::uint64_t>(in, ErrorKind::BadHeader, "positive count");
  const auto n_neg = binio::get_uint<std::uint64_t>(in, ErrorKind::BadHeader, "negative count");
  const double separation = binio::get_f64(in, ErrorKind::BadHeader, "separation");
  std::string encoder = binio::get_string(in, ErrorKind::BadHeader, "encoder name");
  std::vector<double> direction(d);
  for (auto& v : direction) v = binio::get_f64(in, ErrorKind::TruncatedFile, "direction");
  if (!binio::at_eof(in)) throw Error(ErrorKind::BadHeader, "trailing bytes after the direction");
  return {ConceptVector::from_parts(std::move(direction), n_pos, n_neg, separation), std::move(encoder)};
}

StoredConceptVector read_concept_vector(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open concept vector " + path.string());
  return read_concept_vector(in);
}

}  // namespace cvp

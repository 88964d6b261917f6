#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace cvp::text {

// Delimiter-separated values with RFC 4180 quoting: fields may be wrapped in
// double quotes, which allows delimiters, newlines and "" escapes inside.
class DsvReader {
 public:
  DsvReader(std::istream& in, char delimiter) : in_(in), delimiter_(delimiter) {}

  // Reads the next record. Returns false at end of input. Blank lines are
  // skipped. Throws Malformed on an unterminated quote.
  bool next(std::vector<std::string>& fields);

  // 1-based physical line on which the last record started.
  std::size_t line() const { return record_line_; }

 private:
  std::istream& in_;
  char delimiter_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
  bool first_ = true;
};

// Quotes a field only when it contains the delimiter, a quote or a newline.
void write_field(std::ostream& out, std::string_view field, char delimiter);
void write_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter);

// Delimiter implied by a file name: ',' for .csv, otherwise tab.
char delimiter_for(std::string_view path);

}  // namespace cvp::text

#include "cvp/text/dsv.hpp"

#include "cvp/error.hpp"

namespace cvp::text {

bool DsvReader::next(std::vector<std::string>& fields) {
  fields.clear();
  for (;;) {
    int c = in_.peek();
    if (c == std::char_traits<char>::eof()) return false;
    if (c == '\n') {
      in_.get();
      ++line_;
      continue;
    }
    if (c == '\r') {
      in_.get();
      continue;
    }
    break;
  }

  record_line_ = line_;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (;;) {
    int c = in_.get();
    if (c == std::char_traits<char>::eof()) {
      if (quoted) {
        throw Error(ErrorKind::Malformed,
                    "unterminated quoted field starting on line " + std::to_string(record_line_));
      }
      fields.push_back(std::move(field));
      break;
    }
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && !field_started) {
      quoted = true;
      field_started = true;
      continue;
    }
    if (ch == delimiter_) {
      fields.push_back(std::move(field));
      field.clear();
      field_started = false;
      continue;
    }
    if (ch == '\r') continue;
    if (ch == '\n') {
      ++line_;
      fields.push_back(std::move(field));
      break;
    }
    field.push_back(ch);
    field_started = true;
  }

  if (first_) {
    first_ = false;
    // UTF-8 byte order mark
    if (!fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
  }
  return true;
}

void write_field(std::ostream& out, std::string_view field, char delimiter) {
  const bool needs_quotes = field.find_first_of(std::string{delimiter, '"', '\n', '\r'}) !=
                            std::string_view::npos;
  if (!needs_quotes) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

void write_row(std::ostream& out, const std::vector<std::string>& fields, char delimiter) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << delimiter;
    write_field(out, fields[i], delimiter);
  }
  out << '\n';
}

char delimiter_for(std::string_view path) {
  return path.size() >= 4 && path.substr(path.size() - 4) == ".csv" ? ',' : '\t';
}

}  // namespace cvp::text

#include "etbox/io/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>

#include "etbox/core.hpp"

namespace etbox::io {

CsvReader::CsvReader(std::istream& in, char delimiter)
    : in_(in), delimiter_(delimiter) {}

bool CsvReader::next(std::vector<std::string>& fields) {
  while (true) {
    fields.clear();
    if (in_.peek() == std::char_traits<char>::eof()) return false;
    record_line_ = current_line_;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int c;
    while ((c = in_.get()) != std::char_traits<char>::eof()) {
      const char ch = static_cast<char>(c);
      if (in_quotes) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field += '"';
          } else {
            in_quotes = false;
          }
        } else {
          if (ch == '\n') ++current_line_;
          field += ch;
        }
        continue;
      }
      if (ch == '"') {
        in_quotes = true;
        any = true;
      } else if (ch == delimiter_) {
        fields.push_back(std::move(field));
        field.clear();
        any = true;
      } else if (ch == '\r') {
        // tolerate CRLF
      } else if (ch == '\n') {
        ++current_line_;
        break;
      } else {
        field += ch;
        any = true;
      }
    }
    if (in_quotes) {
      throw Error(ErrorKind::kRow, "line " + std::to_string(record_line_) +
                                       ": unterminated quoted field");
    }
    if (!any && field.empty()) continue;
    fields.push_back(std::move(field));
    return true;
  }
}

Header::Header(const std::vector<std::string>& names) : names_(names) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    std::string name = names_[i];
    // UTF-8 byte order mark on the first column.
    if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name = name.substr(3);
    names_[i] = name;
    index_.emplace(name, i);
  }
}

bool Header::has(std::string_view name) const {
  return index_.find(name) != index_.end();
}

std::size_t Header::index(std::string_view name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) {
    throw Error(ErrorKind::kSchema, "missing column '" + std::string(name) + "'");
  }
  return it->second;
}

std::string csv_field(std::string_view value, bool force_quotes) {
  const bool needs = force_quotes ||
                     value.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string join_csv(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += fields[i];
  }
  return line;
}

double parse_double(std::string_view text, std::string_view field) {
  std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::kValidation,
                std::string(field) + ": not a number: '" + s + "'",
                std::string(field));
  }
  return v;
}

long long parse_int(std::string_view text, std::string_view field) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::kValidation,
                std::string(field) + ": not an integer: '" + std::string(text) +
                    "'",
                std::string(field));
  }
  return v;
}

}  // namespace etbox::io

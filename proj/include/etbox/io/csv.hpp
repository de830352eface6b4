#pragma once

#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace etbox::io {

// Streaming RFC 4180 reader: quoted fields may hold delimiters, doubled
// quotes and line breaks. Tracks the physical line each record starts on.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in, char delimiter = ',');

  // False at end of input. Blank lines are skipped.
  bool next(std::vector<std::string>& fields);
  int line() const { return record_line_; }

 private:
  std::istream& in_;
  char delimiter_;
  int current_line_ = 1;
  int record_line_ = 0;
};

// Column positions of a header row.
class Header {
 public:
  Header() = default;
  explicit Header(const std::vector<std::string>& names);

  bool has(std::string_view name) const;
  std::size_t index(std::string_view name) const;
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

std::string csv_field(std::string_view value, bool force_quotes = false);

std::string join_csv(const std::vector<std::string>& fields);

double parse_double(std::string_view text, std::string_view field);
long long parse_int(std::string_view text, std::string_view field);

}  // namespace etbox::io

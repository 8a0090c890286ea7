// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spectrarec {

/// Writes to a sibling temp file and renames it over `path`, so readers
/// never observe a partial file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::span<const unsigned char> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

/// Throws IoError if the file cannot be opened or read.
std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value);
std::string format_float(float value);

/// Throws ConfigError on anything that is not a complete number.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);
unsigned long long parse_uint(std::string_view text);
/// true/false, 1/0, yes/no, on/off.
bool parse_bool(std::string_view text);

// Flat `key = value` text. Blank lines and lines starting with '#' are
// skipped; surrounding whitespace is trimmed.
struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// ConfigError on a line without '=', an empty key or a repeated key.
std::vector<KeyValue> parse_key_values(std::string_view text);

// Minimal RFC-4180 CSV.
using CsvRow = std::vector<std::string>;

class CsvWriter {
 public:
  explicit CsvWriter(const CsvRow& header);

  void add_row(const CsvRow& row);
  const std::string& str() const noexcept { return text_; }

 private:
  void append(const CsvRow& row);

  std::size_t columns_;
  std::string text_;
};

struct CsvTable {
  CsvRow header;
  std::vector<CsvRow> rows;

  /// Index of a header column; throws FormatError if absent.
  std::size_t column(std::string_view name) const;
};

/// Throws FormatError on unbalanced quotes or ragged rows.
CsvTable parse_csv(std::string_view text);

}  // namespace spectrarec

#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace covhess {

/// Parsed RFC-4180 table: header plus rows of raw cell text.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Reads RFC-4180 CSV (quoted fields, doubled quotes, CRLF or LF).
/// Rows whose width differs from the header throw ParseError.
CsvTable parse_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);

/// Quotes a cell when it contains a comma, quote, or newline.
std::string csv_escape(std::string_view cell);

/// 17 significant digits, so values round-trip exactly.
std::string format_double(double value);

/// Writes `contents`, creating parent directories as needed.
void write_text_file(const std::filesystem::path& path, std::string_view contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace covhess

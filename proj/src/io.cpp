#include "covhess/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "covhess/error.hpp"

namespace covhess {

namespace {

// Splits one logical record; returns false at end of input.
bool next_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string cell;
  bool quoted = false;
  bool any = false;
  char ch;
  while (in.get(ch)) {
    any = true;
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          cell.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        cell.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cell));
      cell.clear();
    } else if (ch == '\r') {
      if (in.peek() == '\n') in.get(ch);
      ++line;
      break;
    } else if (ch == '\n') {
      ++line;
      break;
    } else {
      cell.push_back(ch);
    }
  }
  if (quoted) throw Error(ErrorCode::ParseError, "unterminated quote near line " + std::to_string(line));
  if (!any) return false;
  fields.push_back(std::move(cell));
  return true;
}

}  // namespace

CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  std::size_t line = 1;
  if (!next_record(in, table.header, line)) throw Error(ErrorCode::EmptyDataset, "CSV has no header row");
  if (!table.header.empty() && table.header[0].starts_with("\xEF\xBB\xBF")) table.header[0].erase(0, 3);
  std::vector<std::string> fields;
  while (next_record(in, fields, line)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != table.header.size()) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(table.rows.size() + 1) + ": expected " +
                                             std::to_string(table.header.size()) + " fields, got " +
                                             std::to_string(fields.size()));
    }
    table.rows.push_back(fields);
  }
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse_csv(in);
}

std::string csv_escape(std::string_view cell) {
  if (cell.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(cell);
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace covhess

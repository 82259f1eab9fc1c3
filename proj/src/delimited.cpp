#include "scalarexp/delimited.hpp"

#include <fstream>
#include <sstream>

#include "scalarexp/core.hpp"

namespace scalarexp {
namespace {

// Splits one logical record; consumes continuation lines while inside quotes.
bool read_record(std::istream& in, char delim, std::vector<std::string>& fields) {
  fields.clear();
  std::string line;
  if (!std::getline(in, line)) return false;
  std::string field;
  bool quoted = false;
  for (;;) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          field += c;
        }
      } else if (c == '"' && field.empty()) {
        quoted = true;
      } else if (c == delim) {
        fields.push_back(std::move(field));
        field.clear();
      } else if (c != '\r' || i + 1 != line.size()) {
        field += c;
      }
    }
    if (!quoted) break;
    if (!std::getline(in, line)) throw Error("unterminated quoted field");
    field += '\n';
  }
  fields.push_back(std::move(field));
  return true;
}

}  // namespace

DelimitedTable DelimitedTable::parse(std::istream& in) {
  DelimitedTable table;
  std::string first;
  // Skip blank leading lines.
  while (std::getline(in, first)) {
    if (!trim(first).empty()) break;
  }
  if (trim(first).empty()) return table;
  if (first.rfind("\xEF\xBB\xBF", 0) == 0) first.erase(0, 3);
  table.delimiter_ = first.find('\t') != std::string::npos ? '\t' : ',';

  std::istringstream header_stream(first);
  read_record(header_stream, table.delimiter_, table.header_);
  for (auto& h : table.header_) h = std::string(trim(h));

  std::vector<std::string> fields;
  std::size_t line_no = 1;
  while (read_record(in, table.delimiter_, fields)) {
    ++line_no;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    if (fields.size() != table.header_.size()) {
      throw Error("row " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                  " fields, header has " + std::to_string(table.header_.size()));
    }
    table.rows_.push_back(fields);
  }
  return table;
}

DelimitedTable DelimitedTable::read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return parse(in);
}

std::optional<std::size_t> DelimitedTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  return std::nullopt;
}

}  // namespace scalarexp

#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scalarexp {

/// A header-indexed table read from comma- or tab-separated text.
/// The delimiter is a tab when the header line contains one, else a comma.
/// Double-quoted fields (with "" escapes and embedded newlines) are supported.
class DelimitedTable {
 public:
  static DelimitedTable parse(std::istream& in);
  static DelimitedTable read_file(const std::filesystem::path& path);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t row_count() const { return rows_.size(); }
  char delimiter() const { return delimiter_; }

  std::optional<std::size_t> column(std::string_view name) const;
  const std::string& cell(std::size_t row, std::size_t col) const { return rows_[row][col]; }

 private:
  char delimiter_ = ',';
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace scalarexp

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mrball {

enum class OutputFormat { csv, json };

// Deterministic tabular emission: fixed column order, header row, values
// pre-rendered as strings by the caller (interval midpoints at a fixed digit
// count), newline \n, no locale.
class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(std::vector<std::string> row);
  std::string render_csv() const;
  std::string render_json() const;
  void write(const std::filesystem::path& path, OutputFormat format) const;

  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

inline constexpr int kEmitDigits = 17;

}  // namespace mrball

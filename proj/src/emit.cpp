#include "mrball/emit.hpp"

#include <fstream>

#include "json.hpp"
#include "mrball/errors.hpp"

namespace mrball {

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != columns_.size())
    raise(Errc::invalid_argument, "row width does not match the column list");
  rows_.push_back(std::move(row));
}

namespace {

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\n") != std::string::npos;
}

std::string csv_escape(const std::string& s) {
  if (!needs_quoting(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string Table::render_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(columns_[i]);
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string Table::render_json() const {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : rows_) {
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < columns_.size(); ++i) obj[columns_[i]] = row[i];
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

void Table::write(const std::filesystem::path& path, OutputFormat format) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Errc::io_error, "cannot open " + path.string());
  out << (format == OutputFormat::csv ? render_csv() : render_json());
}

}  // namespace mrball

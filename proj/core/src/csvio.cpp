#include "mforge/csvio.hpp"

#include <sstream>

#include "mforge/errors.hpp"
#include "mforge/kvconfig.hpp"

namespace mforge {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void write_line(std::ofstream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << fields[i];
  }
  out << '\n';
}

}  // namespace

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path), width_(header.size()), path_(path) {
  if (!out_) throw DataError("cannot open for writing: " + path);
  write_line(out_, header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_) {
    throw UsageError("csv row width " + std::to_string(fields.size()) + " != header width " +
                     std::to_string(width_) + " in " + path_);
  }
  write_line(out_, fields);
}

void CsvWriter::close() {
  out_.close();
  if (out_.fail()) throw DataError("failed writing " + path_);
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw DataError("csv is missing column \"" + name + "\"");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open: " + path);
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != table.header.size()) {
        throw DataError("ragged csv row in " + path + ": \"" + line + "\"");
      }
      table.rows.push_back(std::move(fields));
    }
  }
  if (first) throw DataError("empty csv: " + path);
  return table;
}

}  // namespace mforge

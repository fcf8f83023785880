#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace mforge {

// Minimal CSV with no quoting: field values in this project never contain
// commas or newlines. Numbers are written in shortest round-trip form so
// emitted files parse back losslessly and runs diff byte-for-byte.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);
  void close();

 private:
  std::ofstream out_;
  std::size_t width_;
  std::string path_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // DataError when absent
};

CsvTable read_csv(const std::string& path);

}  // namespace mforge

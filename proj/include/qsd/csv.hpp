#pragma once

#include <string>
#include <vector>

namespace qsd {

// Minimal CSV with deterministic float formatting (%.17g), so identical runs
// produce byte-identical files.
class CsvWriter {
 public:
  explicit CsvWriter(std::string path);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void header(const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);

  static std::string fmt(double v);
  static std::string fmt(std::size_t v);
  static std::string fmt(int v);

 private:
  struct Impl;
  Impl* impl_;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  int column_index(const std::string& name) const;  // -1 if absent
};

CsvTable read_csv(const std::string& path);

}  // namespace qsd

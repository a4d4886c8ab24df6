#include "qsd/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qsd/errors.hpp"

namespace qsd {

struct CsvWriter::Impl {
  std::FILE* f = nullptr;
  std::string path;
};

CsvWriter::CsvWriter(std::string path) : impl_(new Impl) {
  impl_->path = std::move(path);
  impl_->f = std::fopen(impl_->path.c_str(), "wb");
  if (!impl_->f) {
    delete impl_;
    throw IoError("cannot open " + path + " for writing");
  }
}

CsvWriter::~CsvWriter() {
  if (impl_->f) std::fclose(impl_->f);
  delete impl_;
}

void CsvWriter::header(const std::vector<std::string>& columns) { row(columns); }

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) std::fputc(',', impl_->f);
    std::fwrite(cells[i].data(), 1, cells[i].size(), impl_->f);
  }
  std::fputc('\n', impl_->f);
}

std::string CsvWriter::fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string CsvWriter::fmt(std::size_t v) { return std::to_string(v); }
std::string CsvWriter::fmt(int v) { return std::to_string(v); }

int CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.empty()) continue;
    if (first) {
      table.columns = std::move(cells);
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

}  // namespace qsd

#include "plom/io.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace plom::io {

namespace {

constexpr char kMagic[4] = {'P', 'L', 'O', 'M'};

bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  const char* p = line.data();
  const char* end = p + line.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p >= end) break;
    double v = 0;
    const auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc()) return false;
    out.push_back(v);
    p = next;
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p < end) {
      if (*p != ',') return false;
      ++p;
    }
  }
  return !out.empty();
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  std::vector<double> row;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!parse_row(line, row)) {
      if (first) {
        first = false;  // header line
        continue;
      }
      throw IoError("malformed CSV row in " + path.string() + ": " + line);
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError("ragged CSV rows in " + path.string());
    rows.push_back(row);
  }
  if (rows.empty()) throw IoError("empty CSV file " + path.string());
  Matrix m(Index(rows.size()), Index(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[size_t(i)][size_t(j)];
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Matrix read_matrix_bin(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  uint32_t rows = 0, cols = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&rows), 4);
  in.read(reinterpret_cast<char*>(&cols), 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("not a PLOM binary matrix: " + path.string());
  const Index r = Index(rows), c = Index(cols);
  Matrix m(r, c);
  in.read(reinterpret_cast<char*>(m.data()), std::streamsize(sizeof(double)) * m.size());
  if (!in) throw IoError("truncated binary matrix: " + path.string());
  return m;
}

void write_matrix_bin(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const uint32_t rows = uint32_t(m.rows()), cols = uint32_t(m.cols());
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&rows), 4);
  out.write(reinterpret_cast<const char*>(&cols), 4);
  out.write(reinterpret_cast<const char*>(m.data()),
            std::streamsize(sizeof(double)) * m.size());
}

Matrix read_matrix_auto(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  in.close();
  if (std::memcmp(magic, kMagic, 4) == 0) return read_matrix_bin(path);
  return read_matrix_csv(path);
}

void write_table_csv(const std::filesystem::path& path,
                     const std::vector<std::string>& headers,
                     const std::vector<std::vector<double>>& columns) {
  if (headers.size() != columns.size())
    throw DimensionMismatch("table headers/columns mismatch");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (size_t j = 0; j < headers.size(); ++j) {
    if (j) out << ',';
    out << headers[j];
  }
  out << '\n';
  const size_t n = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != n) throw DimensionMismatch("ragged table columns");
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < columns.size(); ++j) {
      if (j) out << ',';
      out << format_double(columns[j][i]);
    }
    out << '\n';
  }
}

}  // namespace plom::io

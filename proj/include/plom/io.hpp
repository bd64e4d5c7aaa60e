#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "plom/types.hpp"

namespace plom::io {

// CSV matrices: one realization per column, `.` decimal separator, values
// written with 17 significant digits. A non-numeric first line is treated as
// an optional header and skipped on read.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

// Raw binary format: magic "PLOM", u32 rows, u32 cols, f64 column-major,
// little-endian throughout.
Matrix read_matrix_bin(const std::filesystem::path& path);
void write_matrix_bin(const std::filesystem::path& path, const Matrix& m);

// Reads either format, keyed on the magic bytes.
Matrix read_matrix_auto(const std::filesystem::path& path);

// Column-oriented CSV table (one named series per column).
void write_table_csv(const std::filesystem::path& path,
                     const std::vector<std::string>& headers,
                     const std::vector<std::vector<double>>& columns);

std::string format_double(double v);

}  // namespace plom::io

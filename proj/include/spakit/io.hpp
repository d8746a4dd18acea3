#pragma once

#include <filesystem>
#include <iosfwd>

#include "spakit/matrix.hpp"

namespace spakit::io {

/// Dense CSV: one row per line, comma separated, no header.
DataMatrix read_csv(std::istream& in);
DataMatrix read_csv(const std::filesystem::path& path);

/// Matrix Market "matrix coordinate real general" into sparse storage.
DataMatrix read_matrix_market(std::istream& in);
DataMatrix read_matrix_market(const std::filesystem::path& path);

/// Writes with round-trip precision (%.17g).
void write_csv(std::ostream& out, const Dense& M);
void write_csv(const std::filesystem::path& path, const Dense& M);
void write_matrix_market(std::ostream& out, const Sparse& M);

}  // namespace spakit::io

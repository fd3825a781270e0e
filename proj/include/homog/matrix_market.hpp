#pragma once

#include "homog/common.hpp"

#include <filesystem>
#include <iosfwd>

namespace homog {

/// "%%MatrixMarket matrix coordinate complex general", 1-based indices,
/// values with 17 significant digits.
void write_matrix_market(std::ostream& os, const SparseC& m);
void write_matrix_market(const std::filesystem::path& path, const SparseC& m);

/// Reads complex, real or integer general coordinate files. Throws ParseError
/// (position = line number) on malformed input and Error when the file cannot be opened.
SparseC read_matrix_market(std::istream& is);
SparseC read_matrix_market(const std::filesystem::path& path);

}  // namespace homog

#pragma once

#include <filesystem>
#include <string>

#include "stars/edge_set.hpp"
#include "stars/numerics.hpp"

namespace stars::io {

// Shortest-round-trip-safe decimal: 17 significant digits.
std::string format_double(double v);

// Header "x0,...,x{p-1}" followed by one row per observation.
void write_data_csv(const std::filesystem::path& path, const DataMatrix& data);
// Skips a leading non-numeric header line; every row must have the same
// number of numeric fields.
DataMatrix read_data_csv(const std::filesystem::path& path);

// Dense row-major matrix, no header.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

// One "i<TAB>j" line per edge, i < j, 0-based.
void write_edges_tsv(const std::filesystem::path& path, const EdgeSet& edges);
EdgeSet read_edges_tsv(const std::filesystem::path& path, int p);

void write_edges_dot(const std::filesystem::path& path, const EdgeSet& edges,
                     const std::string& name);

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace stars::io

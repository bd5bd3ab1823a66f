#pragma once

#include <filesystem>
#include <iosfwd>

#include "hdpca/matrixcore.hpp"

namespace hdpca {

/// Comma-separated observations, one per row. A first line that does not
/// parse as numbers is taken as a header. Parse failures throw InputError
/// naming the 1-based line number.
DataMatrix read_csv(std::istream& in);
DataMatrix read_csv_file(const std::filesystem::path& path);

/// Writes rows with full round-trip precision, no header.
void write_csv(std::ostream& out, const DataMatrix& data);
void write_csv_file(const std::filesystem::path& path, const DataMatrix& data);

}  // namespace hdpca

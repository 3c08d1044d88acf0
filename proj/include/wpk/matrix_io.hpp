#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "wpk/csr.hpp"
#include "wpk/dense.hpp"

namespace wpk {

enum class MatrixSymmetry { general, symmetric, skew_symmetric };

/// Coordinate real Matrix Market. Symmetric and skew-symmetric storage is
/// expanded, duplicates are summed. Throws MalformedHeader, IndexOutOfRange,
/// NonRealField (complex, pattern or integer fields) or IoError.
CsrMatrix read_matrix_market(const std::filesystem::path& path);
CsrMatrix parse_matrix_market(std::istream& in, const std::string& source = "<stream>");

/// Writes 17 significant digits. For the symmetric kinds only the lower
/// triangle is written (strictly lower for skew); the matrix is not checked.
void write_matrix_market(const CsrMatrix& m, const std::filesystem::path& path,
                         MatrixSymmetry symmetry = MatrixSymmetry::general);
void write_matrix_market(const CsrMatrix& m, std::ostream& out, MatrixSymmetry symmetry = MatrixSymmetry::general);

/// One value per line; blank lines and lines starting with '%' or '#' are skipped.
Vector read_vector(const std::filesystem::path& path);
void write_vector(const Vector& v, const std::filesystem::path& path);

}  // namespace wpk

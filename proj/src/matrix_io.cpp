#include "wpk/matrix_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wpk/error.hpp"

namespace wpk {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

bool skippable(const std::string& line) {
    const auto pos = line.find_first_not_of(" \t\r");
    return pos == std::string::npos || line[pos] == '%';
}

}  // namespace

CsrMatrix parse_matrix_market(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw MalformedHeader(source + ": empty file");
    std::istringstream hs(line);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket") throw MalformedHeader(source + ": missing %%MatrixMarket banner");
    object = lower(object);
    format = lower(format);
    field = lower(field);
    symmetry = lower(symmetry);
    if (object != "matrix" || format != "coordinate")
        throw MalformedHeader(source + ": only 'matrix coordinate' is supported");
    if (field == "complex" || field == "pattern" || field == "integer")
        throw NonRealField(source + ": field '" + field + "' is not supported, real only");
    if (field != "real" && field != "double") throw MalformedHeader(source + ": unknown field '" + field + "'");
    MatrixSymmetry sym;
    if (symmetry == "general") sym = MatrixSymmetry::general;
    else if (symmetry == "symmetric") sym = MatrixSymmetry::symmetric;
    else if (symmetry == "skew-symmetric") sym = MatrixSymmetry::skew_symmetric;
    else throw MalformedHeader(source + ": unsupported symmetry '" + symmetry + "'");

    while (std::getline(in, line) && skippable(line)) {
    }
    std::istringstream ss(line);
    std::size_t rows = 0, cols = 0, nnz = 0;
    if (!(ss >> rows >> cols >> nnz)) throw MalformedHeader(source + ": bad size line");
    if (sym != MatrixSymmetry::general && rows != cols)
        throw MalformedHeader(source + ": symmetric storage requires a square matrix");

    std::vector<Triplet> entries;
    entries.reserve(sym == MatrixSymmetry::general ? nnz : 2 * nnz);
    std::size_t read = 0;
    while (read < nnz && std::getline(in, line)) {
        if (skippable(line)) continue;
        std::istringstream es(line);
        long long i = 0, j = 0;
        double v = 0.0;
        if (!(es >> i >> j >> v)) throw MalformedHeader(source + ": bad entry line '" + line + "'");
        if (i < 1 || j < 1 || static_cast<std::size_t>(i) > rows || static_cast<std::size_t>(j) > cols)
            throw IndexOutOfRange(source + ": entry (" + std::to_string(i) + ", " + std::to_string(j) +
                                  ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
        const std::size_t r = static_cast<std::size_t>(i - 1), c = static_cast<std::size_t>(j - 1);
        entries.push_back({r, c, v});
        if (r != c) {
            if (sym == MatrixSymmetry::symmetric) entries.push_back({c, r, v});
            if (sym == MatrixSymmetry::skew_symmetric) entries.push_back({c, r, -v});
        } else if (sym == MatrixSymmetry::skew_symmetric && v != 0.0) {
            throw MalformedHeader(source + ": nonzero diagonal in skew-symmetric storage");
        }
        ++read;
    }
    if (read != nnz) throw MalformedHeader(source + ": expected " + std::to_string(nnz) + " entries, found " +
                                           std::to_string(read));
    return CsrMatrix::from_triplets(rows, cols, std::move(entries));
}

CsrMatrix read_matrix_market(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path.string() + ": cannot open for reading");
    return parse_matrix_market(in, path.string());
}

void write_matrix_market(const CsrMatrix& m, std::ostream& out, MatrixSymmetry symmetry) {
    const char* kind = symmetry == MatrixSymmetry::general     ? "general"
                       : symmetry == MatrixSymmetry::symmetric ? "symmetric"
                                                               : "skew-symmetric";
    std::vector<Triplet> kept;
    for (const Triplet& t : m.triplets()) {
        if (symmetry == MatrixSymmetry::symmetric && t.col > t.row) continue;
        if (symmetry == MatrixSymmetry::skew_symmetric && t.col >= t.row) continue;
        kept.push_back(t);
    }
    out << "%%MatrixMarket matrix coordinate real " << kind << "\n";
    out << m.rows() << " " << m.cols() << " " << kept.size() << "\n";
    for (const Triplet& t : kept) out << t.row + 1 << " " << t.col + 1 << " " << format_double(t.value) << "\n";
}

void write_matrix_market(const CsrMatrix& m, const std::filesystem::path& path, MatrixSymmetry symmetry) {
    std::ofstream out(path);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    write_matrix_market(m, out, symmetry);
    if (!out) throw IoError(path.string() + ": write failed");
}

Vector read_vector(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path.string() + ": cannot open for reading");
    Vector v;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos || line[pos] == '%' || line[pos] == '#') continue;
        std::istringstream ls(line);
        double x = 0.0;
        if (!(ls >> x)) throw IoError(path.string() + ":" + std::to_string(lineno) + ": not a number");
        v.push_back(x);
    }
    return v;
}

void write_vector(const Vector& v, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    for (double x : v) out << format_double(x) << "\n";
    if (!out) throw IoError(path.string() + ": write failed");
}

}  // namespace wpk

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wpk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    DimensionMismatch(const std::string& where, std::size_t expected, std::size_t got)
        : Error(where + ": dimension mismatch (expected " + std::to_string(expected) +
                ", got " + std::to_string(got) + ")") {}
};

class NotPositiveDefinite : public Error {
public:
    explicit NotPositiveDefinite(std::size_t pivot, const std::string& what = "matrix")
        : Error(what + " is not positive definite (pivot " + std::to_string(pivot) + ")"),
          pivot_(pivot) {}
    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

class Singular : public Error {
public:
    explicit Singular(std::size_t pivot)
        : Error("matrix is singular (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}
    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

class NonConvergence : public Error {
public:
    using Error::Error;
};

class InvalidWeight : public Error {
public:
    using Error::Error;
};

class NotHermitianPreconditioner : public Error {
public:
    NotHermitianPreconditioner()
        : Error("preconditioner is not flagged symmetric positive definite") {}
};

class DensifyLimit : public Error {
public:
    DensifyLimit(std::size_t dim, std::size_t limit)
        : Error("operator of dimension " + std::to_string(dim) +
                " exceeds the densification limit " + std::to_string(limit)) {}
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class MalformedHeader : public IoError {
public:
    using IoError::IoError;
};

class IndexOutOfRange : public IoError {
public:
    using IoError::IoError;
};

class NonRealField : public IoError {
public:
    using IoError::IoError;
};

}  // namespace wpk

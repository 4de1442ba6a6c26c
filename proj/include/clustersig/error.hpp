#pragma once

#include <stdexcept>
#include <string>

namespace clustersig {

// Base of every error thrown by the library. Callers that only care about
// "something went wrong with this dataset/test" catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite values, label columns with gaps, mismatched shapes.
class InvalidData : public Error {
public:
    using Error::Error;
};

// Too few samples for the requested neighbourhood / tree / bisection.
class InsufficientSamples : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Raised by btct when the boundary set is empty and the policy is Error.
class NoBoundary : public Error {
public:
    using Error::Error;
};

// CSV cell could not be parsed. Line and column are 1-based positions in the file.
class DataFormatError : public Error {
public:
    DataFormatError(const std::string& what, std::size_t row, std::size_t col)
        : Error(what + " (line " + std::to_string(row) + ", column " + std::to_string(col) + ")"),
          row_(row), col_(col) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace clustersig

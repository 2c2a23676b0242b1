#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace netq {

/// Malformed or out-of-range input data. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Ingestion failure tied to a specific line of a CSV source.
class IngestError : public DataError {
public:
    IngestError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Numerical failure (ill-conditioning, non-finite results). Exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace netq

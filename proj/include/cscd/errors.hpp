#ifndef CSCD_ERRORS_HPP
#define CSCD_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cscd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An id or index is outside its declared range.
class IndexError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value (slope, ratio, rate, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A caller violated a documented precondition (e.g. a non-binary label).
class ContractError : public Error {
public:
    using Error::Error;
};

/// NaN/Inf produced or detected.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Attention over an empty neighborhood.
class EmptyNeighborhoodError : public Error {
public:
    using Error::Error;
};

/// Metric is undefined for the given input (e.g. AUC on one class).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

/// Filesystem failure: missing file, unwritable directory.
class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed or semantically invalid input file row.
class LoadError : public Error {
public:
    LoadError(const std::string& file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

} // namespace cscd

#endif

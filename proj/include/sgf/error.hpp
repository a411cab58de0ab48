#pragma once

#include <stdexcept>
#include <string>

namespace sgf {

/// Raised when a caller passes arguments that violate an operation's preconditions.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A propagation produced NaN/Inf. `where` names the layer or
/// polynomial order at which the first non-finite value appeared.
class NumericalDivergence : public std::runtime_error {
public:
    NumericalDivergence(const std::string& where, int index)
        : std::runtime_error("numerical divergence at " + where + " " + std::to_string(index)),
          where_(where), index_(index) {}

    const std::string& where() const noexcept { return where_; }
    int index() const noexcept { return index_; }

private:
    std::string where_;
    int index_;
};

class GenerationFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed dataset directory. The message carries `file:line: reason`.
class DatasetFormatError : public std::runtime_error {
public:
    DatasetFormatError(const std::string& file, long line, const std::string& reason)
        : std::runtime_error(line > 0 ? file + ":" + std::to_string(line) + ": " + reason
                                      : file + ": " + reason),
          file_(file), line_(line) {}

    const std::string& file() const noexcept { return file_; }
    long line() const noexcept { return line_; }

private:
    std::string file_;
    long line_;
};

}  // namespace sgf

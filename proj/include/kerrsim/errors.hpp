#pragma once

#include <stdexcept>
#include <string>

namespace kerrsim {

/// Syntax error in a netlist or drive-program file. Carries 1-based line/column.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string msg, int line, int col)
        : std::runtime_error("line " + std::to_string(line) + ":" + std::to_string(col) +
                             ": " + msg),
          line_(line), col_(col) {}

    int line() const { return line_; }
    int col() const { return col_; }

private:
    int line_;
    int col_;
};

/// Structural problem in an otherwise well-formed description.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure during integration (non-finite fields).
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace kerrsim

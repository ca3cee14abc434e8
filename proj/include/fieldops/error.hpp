#pragma once

#include <stdexcept>
#include <string>

namespace fieldops {

enum class ErrorKind {
    Format,      // malformed container, magic or header
    Truncated,   // payload shorter than the header claims
    Dimension,   // operand shape mismatch
    Validation,  // value breaks a type invariant
    Range,       // numeric value outside its legal range
    Parse,       // unreadable text input
    Divergence,  // iterative solve produced non-finite values
    Io,          // filesystem access
    Usage,       // bad command line
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace fieldops

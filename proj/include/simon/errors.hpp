#pragma once

#include <stdexcept>
#include <string>

namespace simon {

// Error categories map 1:1 onto CLI exit codes (see tools/simon_cli.cpp).
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace simon

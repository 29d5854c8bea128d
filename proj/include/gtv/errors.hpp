#pragma once

#include <stdexcept>
#include <string>

namespace gtv {

/// Malformed or inconsistent input (files, dimensions, flags). CLI exit 3.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical breakdown (non-convergence, singularity). CLI exit 4.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gtv

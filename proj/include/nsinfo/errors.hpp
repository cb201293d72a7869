#pragma once

#include <stdexcept>
#include <string>

namespace nsinfo {

// Invalid user input: bad spec, malformed expression, dimension mismatch.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A computation could not be carried out (division over an interval
// containing zero, diameter of an empty set, exhausted refinement budget).
struct ComputeError : std::runtime_error {
    explicit ComputeError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace nsinfo

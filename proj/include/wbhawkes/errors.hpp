#pragma once

#include <stdexcept>
#include <string>

namespace wbhawkes {

// Malformed or inconsistent input data (files, sequences, schemas).
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite or otherwise invalid numerical state surfaced by an algorithm.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace wbhawkes

#pragma once

#include <stdexcept>
#include <string>

namespace ustfwi {

/// Simulation or optimization produced non-finite values or violated a
/// stability bound. Maps to exit code 2 in the CLI.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// A verification run exceeded its configured tolerance. Maps to exit code 3.
struct ToleranceError : std::runtime_error {
    explicit ToleranceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ustfwi

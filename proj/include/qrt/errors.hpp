// errors.hpp: exception types shared across the library and the CLI.
#pragma once

#include <stdexcept>
#include <string>

namespace qrt {

// Invalid input or configuration. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Breakdown of a numerical routine. The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qrt

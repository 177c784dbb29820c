#pragma once

#include <stdexcept>

namespace traits {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    using Error::Error;
};

struct SemanticError : Error {
    using Error::Error;
};

struct RoutingError : Error {
    using Error::Error;
};

struct BatteryInfeasible : Error {
    using Error::Error;
};

struct DegenerateBounds : Error {
    using Error::Error;
};

}  // namespace traits

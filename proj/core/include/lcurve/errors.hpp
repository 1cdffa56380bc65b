#pragma once

#include <stdexcept>
#include <string>

namespace lcurve {

// Malformed configuration or violated precondition on user input.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Factorization failure, domain error in a dual kernel, negative eigenvalue, ...
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A checked mathematical identity failed beyond tolerance.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace lcurve

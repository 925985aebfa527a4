#pragma once

#include <stdexcept>
#include <string>

namespace fedtd {

// Invalid argument value (gamma outside (0,1), n_states < 2, ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Inconsistent or incomplete configuration (K = 0, empty seed list, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Chain is reducible/periodic or an iteration failed to settle.
class ChainStructureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A runtime invariant (e.g. value iterates inside [0, 1/(1-gamma)]) was broken.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fedtd

#pragma once

#include <stdexcept>
#include <string>

namespace qrepsim {

// A physical or numerical parameter is outside its admissible domain.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A protocol exceeded its attempt cap (e.g. a link with success probability 0).
class NonTermination : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A Bell-state projection landed on a zero-probability outcome.
class DegenerateProjection : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace qrepsim

#pragma once

#include <stdexcept>
#include <string>

namespace rankwalk {

/// Input outside the domain of an operation (bad dimensions, non-finite
/// values, unsorted score tables, oversized brute-force requests).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The LP backend could not produce a trustworthy answer.
class NumericFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rankwalk

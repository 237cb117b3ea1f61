#pragma once

#include <stdexcept>
#include <string>

namespace dyadlab {

// Base for every error raised by the library. Callers that only care about
// "the lab rejected this input" can catch this one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input violates a documented precondition (out-of-range parameter, bad shape).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// A mathematical hypothesis of an operation does not hold for the given data
// (pin too close to the support, domination violated, schedule invalid, ...).
class HypothesisViolated : public Error {
public:
    using Error::Error;
};

// Malformed serialized input.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace dyadlab

#pragma once

#include <stdexcept>
#include <string>

namespace ltlab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two particles closer than the coincidence threshold were passed to a weight evaluation.
class SingularInputError : public Error {
public:
    using Error::Error;
};

class DimensionMismatchError : public Error {
public:
    using Error::Error;
};

/// Violated precondition on an argument (negative scattering length, empty grid, ...).
class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

/// An algorithm produced (or was given) a structure that breaks its invariants.
class StructuralError : public Error {
public:
    using Error::Error;
};

class NonFiniteValueError : public Error {
public:
    using Error::Error;
};

}  // namespace ltlab

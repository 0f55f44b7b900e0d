#pragma once

#include <stdexcept>
#include <string>

namespace entangle {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// A matrix that was supposed to be a density operator is not one.
class InvalidState : public Error {
public:
    using Error::Error;
};

class InvalidSchedule : public Error {
public:
    using Error::Error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

// The integrator drifted off the set of density operators; refine the grid.
class StepTooLarge : public Error {
public:
    using Error::Error;
};

// A quantity proven to be real came out with an imaginary residue.
class NonRealValue : public Error {
public:
    using Error::Error;
};

class DegenerateState : public Error {
public:
    using Error::Error;
};

class SearchTooLarge : public Error {
public:
    using Error::Error;
};

}  // namespace entangle

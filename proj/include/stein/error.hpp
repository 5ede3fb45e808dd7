#pragma once

#include <stdexcept>
#include <string>

namespace stein {

// All library failures derive from Error so callers (and the CLI) can
// distinguish numerical/domain failures from programming errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

// Lattice access outside the truncation box.
class IndexRangeError : public Error {
public:
    using Error::Error;
};

// Interpolant evaluated outside its domain, or a stencil that leaves the box.
class DomainError : public Error {
public:
    using Error::Error;
};

// Fourth derivative requested on the knot set.
class UndefinedDerivativeError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

// rho >= 1 for a model that needs a stationary regime.
class StabilityError : public Error {
public:
    using Error::Error;
};

class SamplingError : public Error {
public:
    using Error::Error;
};

// Quadrature or integration tolerance not reached.
class ToleranceError : public Error {
public:
    using Error::Error;
};

}  // namespace stein

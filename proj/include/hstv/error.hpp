#pragma once

#include <stdexcept>
#include <string>

namespace hstv {

/// Raised when an input violates a domain contract (nonconforming mesh,
/// malformed file, asymmetric Hessian, ...). The CLI maps it to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MeshError : public Error {
public:
    using Error::Error;
};

class PlanError : public Error {
public:
    using Error::Error;
};

} // namespace hstv

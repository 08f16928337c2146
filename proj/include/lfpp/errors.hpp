#pragma once

#include <stdexcept>
#include <string>

namespace lfpp {

/// Error taxonomy shared by all modules.  The CLI maps these onto process
/// exit codes (config -> 2, capacity -> 3, numeric -> 4).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument values: out-of-range parameters, malformed inputs.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// A grid or lattice is too coarse to resolve the requested scale.
class ResolutionError : public Error {
public:
    explicit ResolutionError(const std::string& msg) : Error(msg) {}
};

/// Problem size exceeds a hard budget (dense factorization, enumeration).
class CapacityError : public Error {
public:
    explicit CapacityError(const std::string& msg) : Error(msg) {}
};

/// Numerical failure: factorization breakdown, non-finite values.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

/// Two query points cannot be joined within the admissible region.
class UnreachableError : public Error {
public:
    explicit UnreachableError(const std::string& msg) : Error(msg) {}
};

/// Polypath/lattice-path structure violations.
class StructuralError : public Error {
public:
    explicit StructuralError(const std::string& msg) : Error(msg) {}
};

/// Recursive construction ran out of field bands.
class DepthError : public Error {
public:
    explicit DepthError(const std::string& msg) : Error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw DomainError(msg);
}

}  // namespace lfpp

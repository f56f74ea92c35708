#pragma once

#include <stdexcept>
#include <string>

namespace wavecore {

/// Invalid argument or out-of-range request (bad node index, unsupported case, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical kernel failed (singular block, non-convergent eigensolver, failed factorization).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computed result violates a structural guarantee (complex frequencies, energy growth).
class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Frequency fit could not isolate a single harmonic.
class AmbiguousSignalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wavecore

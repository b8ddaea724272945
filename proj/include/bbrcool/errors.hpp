#pragma once

#include <stdexcept>
#include <string>

namespace bbrcool {

/// Input outside the physical domain of an operation (negative dt, v above
/// the dissociation cap, forbidden Delta N, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed or inconsistent configuration: bad files, unknown keys, pump
/// channels outside the basis, missing dipole data.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure could not deliver its contract (grid too small,
/// reducible generator, failed root bracket).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace bbrcool

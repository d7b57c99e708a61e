#pragma once

#include <stdexcept>
#include <string>

namespace gfi {

// Base class for everything thrown by this library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input text (JSON, grids, flag values). CLI exit code 2.
struct parse_error : error {
    using error::error;
};

// Semantically invalid values: bad model parameters, out-of-range beta,
// empty ensembles. CLI exit code 3.
struct domain_error : error {
    using error::error;
};

// A result left the representable/attainable range (overflow despite
// shifting, target mean energy outside the reachable interval). Exit code 3.
struct range_error : error {
    using error::error;
};

// A quantity whose reciprocal is needed vanished: zero heat capacity,
// zero-variance observable. Subtype of domain_error; exit code 3.
struct degenerate_error : domain_error {
    using domain_error::domain_error;
};

// Internal numeric failure (root finder lost its bracket, eigensolver
// returned nonzero info). Should not occur on valid input. Exit code 3.
struct numeric_error : error {
    using error::error;
};

// Filesystem failures. CLI exit code 4.
struct io_error : error {
    using error::error;
};

}  // namespace gfi

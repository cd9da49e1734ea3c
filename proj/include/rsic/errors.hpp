#pragma once

#include <stdexcept>
#include <string>

namespace rsic {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file or JSON text: unknown keys, wrong shapes, bad numbers.
struct ParseError : Error {
    using Error::Error;
};

// A ModelSpec that fails its invariants was passed where a valid one is required.
struct ValidationError : Error {
    using Error::Error;
};

// An operation was called outside its stated domain (bad delta, shift out of range, ...).
struct PreconditionError : Error {
    using Error::Error;
};

// Iterative solve did not reach tolerance; message carries the diagnostic.
struct ConvergenceError : Error {
    using Error::Error;
};

// Entrywise magnitudes left the representable range.
struct OverflowError : Error {
    using Error::Error;
};

// Enumeration would exceed the configured cap.
struct CapError : Error {
    using Error::Error;
};

// Filesystem trouble while writing or reading run artifacts.
struct IoError : Error {
    using Error::Error;
};

} // namespace rsic

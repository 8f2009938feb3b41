#pragma once

#include <stdexcept>
#include <string>

namespace stefan {

// Error taxonomy shared by library and CLI. The CLI maps these onto process
// exit codes: validation/capability -> 2, divergence -> 3 (usage errors are
// handled by the argument parser itself and exit 64).

// Bad input: config values out of range, inconsistent geometry, malformed files.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally valid request that exceeds what the implementation supports,
// e.g. a derivative order beyond the planner's stack depth. The message names
// the missing capability so the caller can re-dimension.
class capability_error : public std::runtime_error {
public:
    explicit capability_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical blow-up at runtime: non-finite state, step-size floor hit,
// non-contracting kernel iteration.
class divergence_error : public std::runtime_error {
public:
    explicit divergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Controller asked for gains at a time its kernel tables do not cover.
// A scheduling problem, not a numerical one; mapped to exit 2 like the
// other input errors.
class staleness_error : public std::runtime_error {
public:
    explicit staleness_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace stefan

#pragma once

#include <stdexcept>
#include <string>

namespace qkd {

// Invalid user-facing configuration (bad parameter values, incompatible
// adversary/protocol pairings). Maps to CLI exit code 2.
struct config_error : std::invalid_argument {
    explicit config_error(const std::string& what) : std::invalid_argument(what) {}
};

// Violation of an API precondition (non-normalized state, reuse of a
// consumed entangled pair).
struct contract_error : std::logic_error {
    explicit contract_error(const std::string& what) : std::logic_error(what) {}
};

// Too few samples to produce the requested estimate.
struct estimation_error : std::runtime_error {
    explicit estimation_error(const std::string& what) : std::runtime_error(what) {}
};

// Residual mismatch survived error correction; keys must be discarded.
// Maps to CLI exit code 4.
struct reconciliation_error : std::runtime_error {
    explicit reconciliation_error(const std::string& what) : std::runtime_error(what) {}
};

// Privacy amplification would produce a non-positive key length.
struct key_exhausted_error : std::runtime_error {
    explicit key_exhausted_error(const std::string& what) : std::runtime_error(what) {}
};

// Authentication key reservoir cannot cover one more tag; the session
// must abort rather than reuse key material.
struct auth_unavailable_error : std::runtime_error {
    explicit auth_unavailable_error(const std::string& what) : std::runtime_error(what) {}
};

// Root finding found no sign change on the bracket.
struct no_root_error : std::runtime_error {
    explicit no_root_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qkd

#pragma once

#include <stdexcept>
#include <string>

namespace mmrec {

// Base for all harness errors. Subtypes exist where callers branch on them.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Remote call failed after exhausting retries (or a non-retryable status).
struct TransportError : Error {
    int last_status = 0;
    TransportError(const std::string& msg, int status) : Error(msg), last_status(status) {}
};

// Input file/record violates a schema contract.
struct SchemaError : Error {
    explicit SchemaError(const std::string& msg) : Error(msg) {}
};

} // namespace mmrec

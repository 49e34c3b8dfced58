#pragma once

#include <string>
#include <string_view>

namespace mmrec {

// SHA-256 hex digest (lowercase). Used for content-addressed cache keys.
std::string sha256_hex(std::string_view data);

// Incremental variant for framed multi-field digests.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(std::string_view data);
    // Appends an unambiguous length-prefixed field.
    void field(std::string_view tag, std::string_view value);
    std::string hex();

private:
    void* ctx_;
};

} // namespace mmrec

#include "mmrec/digest.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <stdexcept>

namespace mmrec {

Sha256::Sha256() {
    EVP_MD_CTX* c = EVP_MD_CTX_new();
    if (!c || EVP_DigestInit_ex(c, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: init failed");
    ctx_ = c;
}

Sha256::~Sha256() {
    if (ctx_) EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_));
}

void Sha256::update(std::string_view data) {
    EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size());
}

void Sha256::field(std::string_view tag, std::string_view value) {
    char head[64];
    int n = std::snprintf(head, sizeof(head), "%.*s:%zu:", static_cast<int>(tag.size()),
                          tag.data(), value.size());
    update(std::string_view(head, static_cast<size_t>(n)));
    update(value);
}

std::string Sha256::hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), md, &len);
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(digits[md[i] >> 4]);
        out.push_back(digits[md[i] & 0xf]);
    }
    return out;
}

std::string sha256_hex(std::string_view data) {
    Sha256 h;
    h.update(data);
    return h.hex();
}

} // namespace mmrec

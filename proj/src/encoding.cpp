#include "mmrec/encoding.hpp"

#include "mmrec/digest.hpp"
#include "mmrec/error.hpp"

#include <fstream>
#include <sstream>

namespace mmrec {

static const char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(std::string_view bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    size_t i = 0;
    while (i + 3 <= bytes.size()) {
        uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                     static_cast<unsigned char>(bytes[i + 2]);
        out.push_back(kB64Alphabet[(v >> 18) & 0x3f]);
        out.push_back(kB64Alphabet[(v >> 12) & 0x3f]);
        out.push_back(kB64Alphabet[(v >> 6) & 0x3f]);
        out.push_back(kB64Alphabet[v & 0x3f]);
        i += 3;
    }
    size_t rest = bytes.size() - i;
    if (rest == 1) {
        uint32_t v = static_cast<unsigned char>(bytes[i]) << 16;
        out.push_back(kB64Alphabet[(v >> 18) & 0x3f]);
        out.push_back(kB64Alphabet[(v >> 12) & 0x3f]);
        out += "==";
    } else if (rest == 2) {
        uint32_t v = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out.push_back(kB64Alphabet[(v >> 18) & 0x3f]);
        out.push_back(kB64Alphabet[(v >> 12) & 0x3f]);
        out.push_back(kB64Alphabet[(v >> 6) & 0x3f]);
        out.push_back('=');
    }
    return out;
}

static int b64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

std::string base64_decode(std::string_view text) {
    std::string out;
    out.reserve(text.size() / 4 * 3);
    uint32_t acc = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=' || c == '\n' || c == '\r') continue;
        int v = b64_value(c);
        if (v < 0) throw Error("base64: invalid character in input");
        acc = (acc << 6) | static_cast<uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<char>((acc >> bits) & 0xff));
        }
    }
    return out;
}

std::string sniff_image_mime(std::string_view b) {
    auto starts = [&](std::string_view magic) {
        return b.size() >= magic.size() && b.substr(0, magic.size()) == magic;
    };
    if (starts("\x89PNG")) return "image/png";
    if (starts("\xff\xd8\xff")) return "image/jpeg";
    if (starts("GIF87a") || starts("GIF89a")) return "image/gif";
    if (starts("BM")) return "image/bmp";
    if (b.size() >= 12 && b.substr(0, 4) == "RIFF" && b.substr(8, 4) == "WEBP")
        return "image/webp";
    return "image/jpeg";
}

std::string ImagePayload::data_uri() const {
    if (remote_uri) return uri;
    return "data:" + mime + ";base64," + base64_encode(bytes);
}

static bool has_prefix(const std::string& s, const char* p) {
    return s.rfind(p, 0) == 0;
}

ImagePayload resolve_image(const std::string& image_ref) {
    ImagePayload p;
    p.uri = image_ref;
    if (has_prefix(image_ref, "http://") || has_prefix(image_ref, "https://")) {
        p.remote_uri = true;
        return p;
    }
    if (has_prefix(image_ref, "data:")) {
        auto comma = image_ref.find(',');
        if (comma == std::string::npos)
            throw Error("image: malformed data URI (no comma): " + image_ref.substr(0, 40));
        std::string header = image_ref.substr(5, comma - 5); // e.g. image/png;base64
        auto semi = header.find(';');
        p.mime = semi == std::string::npos ? header : header.substr(0, semi);
        if (p.mime.empty()) p.mime = "application/octet-stream";
        std::string body = image_ref.substr(comma + 1);
        if (header.find("base64") != std::string::npos)
            p.bytes = base64_decode(body);
        else
            p.bytes = body;
        return p;
    }
    std::ifstream in(image_ref, std::ios::binary);
    if (!in) throw Error("image: cannot read file: " + image_ref);
    std::ostringstream ss;
    ss << in.rdbuf();
    p.bytes = ss.str();
    p.mime = sniff_image_mime(p.bytes);
    return p;
}

std::string image_content_key(const std::string& image_ref) {
    ImagePayload p = resolve_image(image_ref);
    if (p.remote_uri) return sha256_hex("uri:" + p.uri);
    return sha256_hex(p.bytes);
}

} // namespace mmrec

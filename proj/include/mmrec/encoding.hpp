#pragma once

#include <string>
#include <string_view>

namespace mmrec {

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

// Media type from file magic bytes (png/jpeg/gif/webp/bmp); "image/jpeg" fallback.
std::string sniff_image_mime(std::string_view bytes);

// One resolved image part, ready for the wire and for content addressing.
struct ImagePayload {
    std::string bytes; // empty for pass-through http(s) references
    std::string mime;
    std::string uri;        // original reference
    bool remote_uri = false; // http(s) reference sent as-is
    std::string data_uri() const;
};

// Resolves a local path, data: URI, or http(s) URI. Throws Error naming the
// path when a local file is unreadable or a data URI is malformed.
ImagePayload resolve_image(const std::string& image_ref);

// Stable identity of the image content: digest of the payload bytes for local
// files and data URIs (renames don't matter, edits do), digest of the URI for
// remote references.
std::string image_content_key(const std::string& image_ref);

} // namespace mmrec

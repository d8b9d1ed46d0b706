#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace algodiv {

inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t basis = 0xcbf29ce484222325ULL) {
    std::uint64_t h = basis;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

// 16-hex-char fingerprint of raw bytes. No normalization: a one-byte
// whitespace change produces a different digest.
inline std::string content_hash(std::string_view bytes) { return hex64(fnv1a64(bytes)); }

}  // namespace algodiv

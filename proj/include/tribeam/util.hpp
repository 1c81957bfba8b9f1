// SPDX-License-Identifier: Apache-2.0

#ifndef TRIBEAM_UTIL_HPP
#define TRIBEAM_UTIL_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tribeam {

/// FNV-1a 64-bit hash; stable across runs and platforms, used as the config
/// hash embedded in every artifact header.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[i] = digits[v & 0xf];
        v >>= 4;
    }
    return s;
}

/// Error for config/scenario schema violations; carries the offending key so
/// the CLI can report it field by field.
class config_error : public std::runtime_error {
public:
    config_error(std::string key, const std::string& what)
        : std::runtime_error("config key '" + key + "': " + what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

} // namespace tribeam

#endif

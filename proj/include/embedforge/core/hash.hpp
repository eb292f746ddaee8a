#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace embedforge {

// Hex-encoded SHA-256; used for cache keys, journal prompt hashes, and run
// manifests.
std::string sha256_hex(std::string_view data);

std::string sha256_file_hex(const std::string& path);

// FNV-1a 64, the toy encoder's token bucket hash.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace embedforge

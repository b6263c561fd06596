#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace atlantis::core {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file_hex(const std::filesystem::path& path);

/// First 8 bytes of sha256(bytes), big-endian. Stable across platforms.
std::uint64_t sha256_u64(std::string_view bytes);

std::uint64_t fnv1a64(std::string_view bytes);

/// splitmix64 step; use for cheap deterministic value streams.
std::uint64_t splitmix64(std::uint64_t& state);

/// Uniform double in [0,1) from a 64-bit word.
double u64_to_unit_double(std::uint64_t x);

}  // namespace atlantis::core

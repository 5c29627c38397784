#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace psm {

/// 64-bit FNV-1a. Used for scenario hashes, spec fingerprints and manifest digests.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t file_digest(const std::filesystem::path& path);
std::string hex64(std::uint64_t value);

}  // namespace psm

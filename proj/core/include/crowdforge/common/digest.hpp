#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace crowdforge {

// FNV-1a, 64 bit. Used to tag artifacts with digests of their inputs.
std::uint64_t fnv1a64(std::string_view data);

// Digest of a file's bytes. Throws std::runtime_error if unreadable.
std::uint64_t fileDigest(const std::string& path);

std::string digestHex(std::uint64_t d);

// Reads a whole file into a string. Throws std::runtime_error if unreadable.
std::string readFileText(const std::string& path);

}  // namespace crowdforge

#pragma once

#include <cstdint>
#include <string>

namespace quasifree {

/// Shortest decimal form with 17 significant digits (round-trips doubles).
std::string format_g17(double x);

/// FNV-1a 64-bit over a byte string, hex-encoded.
uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

std::string read_file(const std::string& path);

}  // namespace quasifree

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "episodes/generate.hpp"

namespace sw {

// "SWEP" | u32 version | u32 world count | worlds | u64 episode count |
// episodes. All reals are f64 little-endian; see README for field order.
std::vector<std::uint8_t> encode_dataset(const Dataset& dataset);
// Parses the whole buffer before returning; corrupt input raises
// FormatError with the byte offset and yields nothing.
Dataset decode_dataset(std::span<const std::uint8_t> bytes);

// Written to a temporary file and renamed into place.
void save_dataset(const std::string& path, const Dataset& dataset);
Dataset load_dataset(const std::string& path);

}  // namespace sw

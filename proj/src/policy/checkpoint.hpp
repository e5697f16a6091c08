#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "policy/model.hpp"

namespace sw {

// "SWCK" | u32 version | str config JSON | u32 count | count x (str name,
// u64 byte length, SWFT block with grid_h = rows, grid_w = 1, dim = cols).
std::vector<std::uint8_t> encode_checkpoint(const PolicyModel& model);
// Builds a fresh model from the embedded config and overwrites every
// parameter; nothing is returned unless the whole file parses.
PolicyModel decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::string& path, const PolicyModel& model);
PolicyModel load_checkpoint(const std::string& path);

// Content hash of an encoded checkpoint, printed as 16 hex digits.
std::string checkpoint_id(std::span<const std::uint8_t> bytes);

}  // namespace sw

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sw {

// Standard alphabet with '=' padding.
std::string base64_encode(std::span<const std::uint8_t> bytes);
// Throws FormatError on characters outside the alphabet or bad padding.
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace sw

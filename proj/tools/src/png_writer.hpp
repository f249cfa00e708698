#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace diffeo::cli {

// 8-bit grayscale (channels = 1) or RGB (channels = 3), rows top to bottom.
void write_png(const std::string& path, std::size_t width, std::size_t height, int channels,
               const std::vector<std::uint8_t>& pixels);

}  // namespace diffeo::cli

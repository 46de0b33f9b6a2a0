#pragma once

#include <cstdint>
#include <vector>

#include "cltrack/core/types.hpp"

namespace cltrack::rle {

/// Row-major run lengths, alternating 0-run / 1-run and always starting with the 0-run
/// (which may be 0). The runs sum to height * width.
std::vector<std::uint32_t> encode(const MaskGrid& mask);

/// Inverse of encode. Throws ConfigError if the runs do not sum to height * width.
MaskGrid decode(const std::vector<std::uint32_t>& runs, int height, int width);

}  // namespace cltrack::rle

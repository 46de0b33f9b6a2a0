#include "cltrack/core/rle.hpp"

#include <fmt/format.h>

#include "cltrack/core/error.hpp"

namespace cltrack::rle {

std::vector<std::uint32_t> encode(const MaskGrid& mask) {
    std::vector<std::uint32_t> runs;
    std::uint8_t current = 0;
    std::uint32_t length = 0;
    for (auto c : mask.cells()) {
        if (c != current) {
            runs.push_back(length);
            current = c;
            length = 0;
        }
        ++length;
    }
    runs.push_back(length);
    return runs;
}

MaskGrid decode(const std::vector<std::uint32_t>& runs, int height, int width) {
    if (height <= 0 || width <= 0) {
        throw ConfigError("rle: mask dimensions must be positive");
    }
    const std::size_t total = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    std::vector<std::uint8_t> cells;
    cells.reserve(total);
    std::uint8_t value = 0;
    for (auto run : runs) {
        if (cells.size() + run > total) {
            throw ConfigError(fmt::format("rle: runs exceed {}x{} cells", height, width));
        }
        cells.insert(cells.end(), run, value);
        value ^= 1;
    }
    if (cells.size() != total) {
        throw ConfigError(
            fmt::format("rle: runs sum to {} but mask has {} cells", cells.size(), total));
    }
    return MaskGrid(height, width, std::move(cells));
}

}  // namespace cltrack::rle

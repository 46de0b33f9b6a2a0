#include "cltrack/core/types.hpp"

#include <cmath>
#include <cstring>

#include "cltrack/core/error.hpp"

namespace cltrack {

Embedding::Embedding(std::vector<double> values) : values_(std::move(values)) {}

Embedding::Embedding(std::initializer_list<double> values) : values_(values) {}

double Embedding::norm() const { return std::sqrt(dot(*this)); }

double Embedding::dot(const Embedding& other) const {
    if (other.dim() != dim()) {
        throw PreconditionError("embedding dimension mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        acc += values_[i] * other.values_[i];
    }
    return acc;
}

std::uint64_t Embedding::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : values_) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof(double));
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

MaskGrid::MaskGrid(int height, int width)
    : MaskGrid(height, width,
               std::vector<std::uint8_t>(static_cast<std::size_t>(height > 0 ? height : 0) *
                                         static_cast<std::size_t>(width > 0 ? width : 0))) {}

MaskGrid::MaskGrid(int height, int width, std::vector<std::uint8_t> cells)
    : height_(height), width_(width), cells_(std::move(cells)) {
    if (height <= 0 || width <= 0) {
        throw PreconditionError("mask dimensions must be positive");
    }
    if (cells_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
        throw PreconditionError("mask cell count does not match height * width");
    }
    for (auto& c : cells_) {
        c = c != 0 ? 1 : 0;
    }
}

std::size_t MaskGrid::count() const {
    std::size_t n = 0;
    for (auto c : cells_) {
        n += c;
    }
    return n;
}

double region_iou(const MaskGrid& a, const MaskGrid& b) {
    if (!a.same_shape(b)) {
        throw PreconditionError("mask shape mismatch");
    }
    std::size_t inter = 0;
    std::size_t uni = 0;
    auto ca = a.cells();
    auto cb = b.cells();
    for (std::size_t i = 0; i < ca.size(); ++i) {
        inter += ca[i] & cb[i];
        uni += ca[i] | cb[i];
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace cltrack

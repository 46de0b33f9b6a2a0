#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cltrack {

/// Frames since stream start.
struct FrameIndex {
    std::int64_t value = 0;

    constexpr FrameIndex() = default;
    constexpr explicit FrameIndex(std::int64_t v) : value(v) {}

    constexpr auto operator<=>(const FrameIndex&) const = default;
    constexpr FrameIndex next() const { return FrameIndex{value + 1}; }
};

constexpr std::int64_t operator-(FrameIndex a, FrameIndex b) { return a.value - b.value; }

/// Memory-encoder output for one frame.
class Embedding {
public:
    Embedding() = default;
    explicit Embedding(std::vector<double> values);
    Embedding(std::initializer_list<double> values);

    std::size_t dim() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    double norm() const;
    double dot(const Embedding& other) const;

    /// FNV-1a over the IEEE-754 bytes; used in memory snapshots.
    std::uint64_t hash() const;

    bool operator==(const Embedding&) const = default;

private:
    std::vector<double> values_;
};

/// Binary segmentation mask, row-major.
class MaskGrid {
public:
    MaskGrid() = default;
    MaskGrid(int height, int width);
    MaskGrid(int height, int width, std::vector<std::uint8_t> cells);

    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return cells_.size(); }

    bool at(int row, int col) const { return cells_[index(row, col)] != 0; }
    void set(int row, int col, bool on) { cells_[index(row, col)] = on ? 1 : 0; }
    bool operator[](std::size_t i) const { return cells_[i] != 0; }

    std::span<const std::uint8_t> cells() const { return cells_; }

    std::size_t count() const;
    bool is_empty() const { return count() == 0; }
    bool same_shape(const MaskGrid& other) const {
        return height_ == other.height_ && width_ == other.width_;
    }

    bool operator==(const MaskGrid&) const = default;

private:
    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<std::uint8_t> cells_;
};

/// |a ∩ b| / |a ∪ b|. Two empty masks have no region to agree on and score 0;
/// the J metric applies its own empty-frame convention on top of this.
double region_iou(const MaskGrid& a, const MaskGrid& b);

/// Per-frame prediction summary emitted by a segmentation backend.
struct ScoreReport {
    FrameIndex frame;
    double iou_score = 0.0;
    double occlusion_logit = 0.0;
    std::optional<Embedding> embedding;
    MaskGrid mask;
};

}  // namespace cltrack

#pragma once

#include <deque>

#include "cltrack/core/types.hpp"
#include "cltrack/kernels/tensor.hpp"

namespace cltrack::kernels {

/// The two most recent encoder feature grids, oldest first.
class SensoryMemory {
public:
    static constexpr std::size_t kSlots = 2;

    struct Slot {
        FrameIndex frame;
        FeatureGrid grid;
    };

    /// Stores `grid` for `frame`, evicting the oldest slot when both are taken.
    /// Throws PreconditionError unless `frame` is newer than every stored tag.
    void update(FeatureGrid grid, FrameIndex frame);

    std::size_t size() const { return slots_.size(); }
    bool empty() const { return slots_.empty(); }
    const std::deque<Slot>& slots() const { return slots_; }
    void clear() { slots_.clear(); }

private:
    std::deque<Slot> slots_;
};

}  // namespace cltrack::kernels

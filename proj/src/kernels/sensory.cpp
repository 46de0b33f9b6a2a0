#include "cltrack/kernels/sensory.hpp"

#include <fmt/format.h>

#include "cltrack/core/error.hpp"

namespace cltrack::kernels {

void SensoryMemory::update(FeatureGrid grid, FrameIndex frame) {
    if (!slots_.empty() && frame <= slots_.back().frame) {
        throw PreconditionError(fmt::format("sensory memory: frame {} is not newer than {}",
                                            frame.value, slots_.back().frame.value));
    }
    slots_.push_back({frame, std::move(grid)});
    while (slots_.size() > kSlots) {
        slots_.pop_front();
    }
}

}  // namespace cltrack::kernels

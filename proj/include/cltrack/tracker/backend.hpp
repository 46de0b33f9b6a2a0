#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "cltrack/core/types.hpp"
#include "cltrack/kernels/sensory.hpp"
#include "cltrack/memory/memory_bank.hpp"

namespace cltrack::tracker {

enum class BackendMode { Detect, Track };

/// Opaque per-frame input. `features` may be empty for backends that do not consume
/// encoder features (oracle and replay backends look frames up by index).
struct FramePayload {
    FrameIndex frame;
    kernels::FeatureGrid features;
};

struct BackendCapabilities {
    std::size_t embedding_dim = 0;
    int mask_height = 0;
    int mask_width = 0;
};

struct BackendRequest {
    BackendMode mode;
    const FramePayload& payload;
    const Embedding& text;
    std::span<const memory::MemoryEntry> context;  // empty in Detect mode
    const kernels::SensoryMemory& sensory;
};

/// Segmentation model behind the tracker. Implementations must be deterministic for
/// identical requests and safe to call concurrently from several trackers.
class SegmentationBackend {
public:
    virtual ~SegmentationBackend() = default;

    virtual BackendCapabilities capabilities() const = 0;
    virtual std::string name() const = 0;

    /// Returns a report for request.payload.frame. Errors propagate to the caller.
    virtual ScoreReport segment(const BackendRequest& request) const = 0;
};

}  // namespace cltrack::tracker

#pragma once

#include <memory>

#include "cltrack/sim/scene.hpp"
#include "cltrack/tracker/backend.hpp"

namespace cltrack::sim {

/// Ground-truth-driven stand-in for a segmentation model whose accuracy depends on how
/// well the memory context covers the current viewpoint.
///
/// Target quality q:
///   Detect: scripted detection quality plus jitter.
///   Track:  base + gain * max_e cos(e.embedding, viewpoint_t), clamped to [0, 1].
/// The emitted mask is the ground truth eroded (deepest pixels kept) or dilated (nearest
/// background pixels added) until its IoU with the ground truth is as close to q as the
/// pixel grid allows; iou_score is that realized IoU plus noise truncated at 3.5 stddev.
///
/// Emitted embeddings are viewpoint_t + contamination * c_t * axis + noise, where c_t is
/// 1 - q in detection and, in tracking,
///   persistence * (anchor * c_initial + (1 - anchor) * c_best) + (1 - persistence) * (1 - q)
/// with c_initial and c_best decoded from the initial and the best-matching memory entries.
/// Errors therefore accumulate, and a poor initial reference never fully washes out.
class OracleBackend final : public tracker::SegmentationBackend {
public:
    OracleBackend(std::shared_ptr<const Scene> scene, std::uint64_t seed);

    tracker::BackendCapabilities capabilities() const override;
    std::string name() const override { return "oracle"; }
    ScoreReport segment(const tracker::BackendRequest& request) const override;

    struct Quality {
        double q = 0.0;
        double contamination = 0.0;
    };
    /// Target quality for a request, before mask synthesis. Throws PreconditionError for a
    /// tracking request with an empty memory context or a frame outside the scene.
    Quality target_quality(const tracker::BackendRequest& request) const;

    /// Contamination encoded in an embedding, clamped to [0, 1].
    double decode_contamination(const Embedding& e) const;

    const Scene& scene() const { return *scene_; }

private:
    std::shared_ptr<const Scene> scene_;
    std::uint64_t seed_;
};

/// Mask whose IoU with `gt` is as close to `q` as possible. `dilate` selects growth
/// instead of shrinkage (falls back to erosion when the grid has no room).
MaskGrid degrade_mask(const MaskGrid& gt, double q, bool dilate);

}  // namespace cltrack::sim

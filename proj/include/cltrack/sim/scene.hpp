#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cltrack/core/types.hpp"
#include "cltrack/tracker/backend.hpp"

namespace cltrack::sim {

enum class Shape { Ellipse, Rectangle };

/// center(t) = center + velocity * t + amplitude * sin(2 pi t / period)
struct Trajectory {
    Shape shape = Shape::Ellipse;
    double center_x = 16.0;
    double center_y = 16.0;
    double velocity_x = 0.0;
    double velocity_y = 0.0;
    double amplitude_x = 0.0;
    double amplitude_y = 0.0;
    double period = 100.0;
    double axis_a = 7.0;  // half-width
    double axis_b = 5.0;  // half-height
};

/// Inclusive frame range.
struct Interval {
    std::int64_t start = 0;
    std::int64_t end = 0;
};

struct DriftKnot {
    std::int64_t frame = 0;
    double angle = 0.0;
};

enum class DriftKind {
    Linear,  // start_angle + rate * t
    Knots,   // piecewise-linear through explicit knots, constant outside them
    Jumps,   // seeded: dwell at one of `viewpoints` evenly spaced angles, then ramp to another
};

struct Drift {
    DriftKind kind = DriftKind::Linear;
    double start_angle = 0.0;
    double rate = 0.0;
    std::vector<DriftKnot> knots;
    int viewpoints = 4;
    int dwell_min = 6;
    int dwell_max = 16;
    int ramp = 2;
};

struct Noise {
    double score = 0.02;      // iou_score noise stddev
    double embedding = 0.05;  // per-dimension embedding noise stddev
    double occlusion = 0.5;   // occlusion-logit noise stddev
};

/// Oracle fidelity model. Tracking quality is base + gain * best memory similarity.
struct Fidelity {
    double base = 0.55;
    double gain = 0.4;
    /// Fraction of the reference contamination inherited per frame.
    double persistence = 0.9;
    /// Share of the reference contamination taken from the permanent initial entry; the
    /// rest comes from the best-matching entry.
    double anchor = 0.3;
    /// Weight of the contamination axis in emitted embeddings.
    double contamination = 3.0;
    double occlusion_scale = 8.0;
    double occlusion_offset = 0.4;
};

/// Detection-stage quality: `early_quality` for frames before `early_frames`, then `quality`.
struct Detection {
    double quality = 0.9;
    double jitter = 0.03;
    std::int64_t early_frames = 0;
    double early_quality = 0.72;
    double early_jitter = 0.06;
};

struct SceneScript {
    std::int64_t length = 0;
    int height = 32;
    int width = 32;
    int embedding_dim = 8;
    Trajectory trajectory;
    /// Empty means present on every frame.
    std::vector<Interval> presence;
    Drift drift;
    Noise noise;
    Fidelity fidelity;
    Detection detection;
    std::uint64_t seed = 0;

    /// Throws ConfigError on invalid intervals, non-positive axes or dimensions.
    void validate() const;
    bool present(std::int64_t frame) const;
};

struct GroundTruth {
    std::vector<MaskGrid> masks;        // empty mask on non-presence frames
    std::vector<double> angles;         // viewpoint angle per frame (radians)
    std::vector<Embedding> viewpoints;  // unit vectors in the (0,1) plane
    std::vector<bool> present;

    std::size_t size() const { return masks.size(); }
};

struct Scene {
    SceneScript script;
    std::vector<tracker::FramePayload> frames;
    GroundTruth truth;
};

/// Axis layout of oracle embeddings.
inline constexpr std::size_t kViewpointAxisX = 0;
inline constexpr std::size_t kViewpointAxisY = 1;
inline constexpr std::size_t kContaminationAxis = 2;
inline constexpr std::size_t kBackgroundAxis = 3;

/// Unit viewpoint embedding of `dim` entries for `angle`.
Embedding viewpoint_embedding(double angle, int dim);

/// Viewpoint angle per frame; deterministic given the script (Jumps uses the seed).
std::vector<double> viewpoint_angles(const SceneScript& script);

/// Renders ground-truth masks by point-in-shape tests at pixel centres.
Scene generate_stream(const SceneScript& script);

/// Built-in scenarios: "default" (drifting viewpoint), "static", "early-low-quality",
/// "occlusion". Throws ConfigError for other names.
SceneScript builtin_scenario(std::string_view name);
std::vector<std::string> builtin_scenarios();

}  // namespace cltrack::sim

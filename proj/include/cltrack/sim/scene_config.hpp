#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "cltrack/core/config.hpp"
#include "cltrack/sim/scene.hpp"

namespace cltrack::sim {

struct SimulationConfig {
    SceneScript script;
    TrackerConfig tracker;
};

/// JSON scene configuration. Every key is optional; unknown keys are rejected.
///
///   scenario              built-in scenario to start from (default "default")
///   length height width embedding_dim seed
///   trajectory.{shape ("ellipse"|"rectangle"), center_x, center_y, velocity_x,
///               velocity_y, amplitude_x, amplitude_y, period, axis_a, axis_b}
///   presence              [[start, end], ...] inclusive frame ranges
///   drift.{kind ("linear"|"knots"|"jumps"), start_angle, rate, knots [[frame, angle], ...],
///          viewpoints, dwell_min, dwell_max, ramp}
///   noise.{score, embedding, occlusion}
///   fidelity.{base, gain, persistence, anchor, contamination, occlusion_scale, occlusion_offset}
///   detection.{quality, jitter, early_frames, early_quality, early_jitter}
///   tracker.{delta_iou, delta_o, n_w, gamma_iou, n_p, n_l, short_term_capacity, policy,
///            interval_every, interval_keep}
///
/// Throws ConfigError on malformed JSON, unknown keys, wrong types or invalid values.
SimulationConfig parse_simulation_config(std::string_view text);
SimulationConfig load_simulation_config(const std::filesystem::path& path);

/// Configuration starting from a built-in scenario with default tracker settings.
SimulationConfig scenario_config(std::string_view scenario);

/// Canonical JSON with every key spelled out; parse_simulation_config round-trips it.
std::string to_json(const SimulationConfig& config);

}  // namespace cltrack::sim

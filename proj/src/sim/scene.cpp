#include "cltrack/sim/scene.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "cltrack/core/error.hpp"
#include "cltrack/core/random.hpp"

namespace cltrack::sim {

void SceneScript::validate() const {
    if (length < 0) {
        throw ConfigError("scene: length must be >= 0");
    }
    if (height < 1 || width < 1) {
        throw ConfigError("scene: height and width must be positive");
    }
    if (embedding_dim < 4) {
        throw ConfigError("scene: embedding_dim must be >= 4");
    }
    if (!(trajectory.axis_a > 0.0) || !(trajectory.axis_b > 0.0)) {
        throw ConfigError("scene: trajectory axes must be positive");
    }
    if (!(trajectory.period > 0.0)) {
        throw ConfigError("scene: trajectory period must be positive");
    }
    for (const auto& iv : presence) {
        if (iv.start < 0 || iv.end < iv.start || iv.end >= length) {
            throw ConfigError(fmt::format("scene: presence interval [{}, {}] outside [0, {})",
                                          iv.start, iv.end, length));
        }
    }
    if (drift.kind == DriftKind::Jumps) {
        if (drift.viewpoints < 1 || drift.dwell_min < 1 || drift.dwell_max < drift.dwell_min ||
            drift.ramp < 0) {
            throw ConfigError("scene: invalid jump-drift parameters");
        }
    }
    if (drift.kind == DriftKind::Knots) {
        if (drift.knots.empty()) {
            throw ConfigError("scene: knot drift needs at least one knot");
        }
        for (std::size_t i = 1; i < drift.knots.size(); ++i) {
            if (drift.knots[i].frame <= drift.knots[i - 1].frame) {
                throw ConfigError("scene: drift knots must have increasing frames");
            }
        }
    }
    if (noise.score < 0.0 || noise.embedding < 0.0 || noise.occlusion < 0.0) {
        throw ConfigError("scene: noise stddevs must be >= 0");
    }
    if (fidelity.persistence < 0.0 || fidelity.persistence > 1.0) {
        throw ConfigError("scene: fidelity.persistence must lie in [0, 1]");
    }
    if (fidelity.anchor < 0.0 || fidelity.anchor > 1.0) {
        throw ConfigError("scene: fidelity.anchor must lie in [0, 1]");
    }
}

bool SceneScript::present(std::int64_t frame) const {
    if (presence.empty()) {
        return true;
    }
    for (const auto& iv : presence) {
        if (frame >= iv.start && frame <= iv.end) {
            return true;
        }
    }
    return false;
}

Embedding viewpoint_embedding(double angle, int dim) {
    std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
    v[kViewpointAxisX] = std::cos(angle);
    v[kViewpointAxisY] = std::sin(angle);
    return Embedding(std::move(v));
}

namespace {

std::vector<double> interpolate(const std::vector<DriftKnot>& knots, std::int64_t length) {
    std::vector<double> out(static_cast<std::size_t>(length));
    std::size_t k = 0;
    for (std::int64_t t = 0; t < length; ++t) {
        while (k + 1 < knots.size() && knots[k + 1].frame <= t) {
            ++k;
        }
        double angle = knots[k].angle;
        if (t > knots[k].frame && k + 1 < knots.size()) {
            const double f = static_cast<double>(t - knots[k].frame) /
                             static_cast<double>(knots[k + 1].frame - knots[k].frame);
            angle = knots[k].angle + f * (knots[k + 1].angle - knots[k].angle);
        } else if (t < knots[k].frame) {
            angle = knots[k].angle;
        }
        out[static_cast<std::size_t>(t)] = angle;
    }
    return out;
}

std::vector<DriftKnot> jump_knots(const SceneScript& s) {
    Rng rng(mix_seed(s.seed, 0xd41f7));
    const auto& d = s.drift;
    const double step = 2.0 * std::numbers::pi / d.viewpoints;
    int current = static_cast<int>(rng.uniform_int(0, d.viewpoints - 1));
    std::vector<DriftKnot> knots{{0, d.start_angle + step * current}};
    std::int64_t t = 0;
    while (t < s.length) {
        t += rng.uniform_int(d.dwell_min, d.dwell_max);
        knots.push_back({t, d.start_angle + step * current});
        if (d.viewpoints > 1) {
            int next = static_cast<int>(rng.uniform_int(0, d.viewpoints - 2));
            current = next >= current ? next + 1 : next;
        }
        t += std::max(d.ramp, 1);
        knots.push_back({t, d.start_angle + step * current});
    }
    return knots;
}

}  // namespace

std::vector<double> viewpoint_angles(const SceneScript& s) {
    switch (s.drift.kind) {
    case DriftKind::Linear: {
        std::vector<double> out(static_cast<std::size_t>(s.length));
        for (std::int64_t t = 0; t < s.length; ++t) {
            out[static_cast<std::size_t>(t)] = s.drift.start_angle + s.drift.rate * t;
        }
        return out;
    }
    case DriftKind::Knots:
        return interpolate(s.drift.knots, s.length);
    case DriftKind::Jumps:
        return interpolate(jump_knots(s), s.length);
    }
    return {};
}

Scene generate_stream(const SceneScript& script) {
    script.validate();
    Scene scene;
    scene.script = script;
    const auto n = static_cast<std::size_t>(script.length);
    scene.frames.reserve(n);
    scene.truth.angles = viewpoint_angles(script);
    const auto& tr = script.trajectory;
    for (std::int64_t t = 0; t < script.length; ++t) {
        scene.frames.push_back(tracker::FramePayload{FrameIndex{t}, {}});
        const bool present = script.present(t);
        MaskGrid mask(script.height, script.width);
        if (present) {
            const double phase = 2.0 * std::numbers::pi * static_cast<double>(t) / tr.period;
            const double cx = tr.center_x + tr.velocity_x * t + tr.amplitude_x * std::sin(phase);
            const double cy = tr.center_y + tr.velocity_y * t + tr.amplitude_y * std::sin(phase);
            for (int r = 0; r < script.height; ++r) {
                for (int c = 0; c < script.width; ++c) {
                    const double dx = (c + 0.5 - cx) / tr.axis_a;
                    const double dy = (r + 0.5 - cy) / tr.axis_b;
                    const bool inside = tr.shape == Shape::Ellipse
                                            ? dx * dx + dy * dy <= 1.0
                                            : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
                    mask.set(r, c, inside);
                }
            }
        }
        scene.truth.masks.push_back(std::move(mask));
        scene.truth.present.push_back(present);
        scene.truth.viewpoints.push_back(
            viewpoint_embedding(scene.truth.angles[static_cast<std::size_t>(t)],
                                script.embedding_dim));
    }
    return scene;
}

SceneScript builtin_scenario(std::string_view name) {
    SceneScript s;
    s.seed = 1;
    if (name == "default") {
        s.length = 500;
        s.trajectory.amplitude_x = 6.0;
        s.trajectory.amplitude_y = 4.0;
        s.trajectory.period = 120.0;
        s.drift.kind = DriftKind::Jumps;
        return s;
    }
    if (name == "static") {
        s.length = 200;
        s.drift.kind = DriftKind::Linear;
        s.drift.rate = 0.0;
        return s;
    }
    if (name == "early-low-quality") {
        s.length = 300;
        s.trajectory.amplitude_x = 6.0;
        s.trajectory.amplitude_y = 4.0;
        s.trajectory.period = 120.0;
        s.drift.kind = DriftKind::Jumps;
        s.detection.early_frames = 30;
        return s;
    }
    if (name == "occlusion") {
        s.length = 300;
        s.trajectory.amplitude_x = 6.0;
        s.trajectory.period = 120.0;
        s.drift.kind = DriftKind::Jumps;
        s.presence = {{0, 119}, {150, 299}};
        return s;
    }
    throw ConfigError(fmt::format("unknown scenario '{}'", name));
}

std::vector<std::string> builtin_scenarios() {
    return {"default", "static", "early-low-quality", "occlusion"};
}

}  // namespace cltrack::sim

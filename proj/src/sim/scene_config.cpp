#include "cltrack/sim/scene_config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "cltrack/core/error.hpp"

namespace cltrack::sim {

namespace {

using nlohmann::json;

using Setter = std::function<void(const json&, const std::string&)>;

template <typename T>
T read(const json& v, const std::string& key) {
    try {
        if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) {
                throw ConfigError(fmt::format("config: '{}' must be a number", key));
            }
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) {
                throw ConfigError(fmt::format("config: '{}' must be an integer", key));
            }
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) {
                throw ConfigError(fmt::format("config: '{}' must be a string", key));
            }
        }
        return v.get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("config: '{}': {}", key, e.what()));
    }
}

template <typename T>
Setter set(T& field) {
    return [&field](const json& v, const std::string& key) { field = read<T>(v, key); };
}

void apply(const json& object, const std::map<std::string, Setter>& setters,
           const std::string& prefix) {
    if (!object.is_object()) {
        throw ConfigError(fmt::format("config: '{}' must be an object", prefix));
    }
    for (const auto& [key, value] : object.items()) {
        const auto path = prefix.empty() ? key : prefix + "." + key;
        const auto it = setters.find(key);
        if (it == setters.end()) {
            throw ConfigError(fmt::format("config: unknown key '{}'", path));
        }
        it->second(value, path);
    }
}

Shape parse_shape(const std::string& s, const std::string& key) {
    if (s == "ellipse") return Shape::Ellipse;
    if (s == "rectangle") return Shape::Rectangle;
    throw ConfigError(fmt::format("config: '{}' must be \"ellipse\" or \"rectangle\"", key));
}

DriftKind parse_drift(const std::string& s, const std::string& key) {
    if (s == "linear") return DriftKind::Linear;
    if (s == "knots") return DriftKind::Knots;
    if (s == "jumps") return DriftKind::Jumps;
    throw ConfigError(fmt::format("config: '{}' must be \"linear\", \"knots\" or \"jumps\"", key));
}

std::string_view shape_name(Shape s) { return s == Shape::Ellipse ? "ellipse" : "rectangle"; }

std::string_view drift_name(DriftKind k) {
    switch (k) {
    case DriftKind::Linear: return "linear";
    case DriftKind::Knots: return "knots";
    case DriftKind::Jumps: return "jumps";
    }
    return "linear";
}

const json& pair_at(const json& list, std::size_t i, const std::string& key) {
    const auto& p = list[i];
    if (!p.is_array() || p.size() != 2) {
        throw ConfigError(fmt::format("config: '{}[{}]' must be a two-element array", key, i));
    }
    return p;
}

}  // namespace

SimulationConfig scenario_config(std::string_view scenario) {
    SimulationConfig c;
    c.script = builtin_scenario(scenario);
    return c;
}

SimulationConfig parse_simulation_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("config: malformed JSON: {}", e.what()));
    }
    if (!doc.is_object()) {
        throw ConfigError("config: top level must be an object");
    }
    std::string scenario = "default";
    if (doc.contains("scenario")) {
        scenario = read<std::string>(doc["scenario"], "scenario");
    }
    auto c = scenario_config(scenario);
    auto& s = c.script;
    auto& tr = s.trajectory;
    auto& d = s.drift;
    auto& t = c.tracker;

    const std::map<std::string, Setter> trajectory{
        {"shape", [&](const json& v, const std::string& k) { tr.shape = parse_shape(read<std::string>(v, k), k); }},
        {"center_x", set(tr.center_x)},       {"center_y", set(tr.center_y)},
        {"velocity_x", set(tr.velocity_x)},   {"velocity_y", set(tr.velocity_y)},
        {"amplitude_x", set(tr.amplitude_x)}, {"amplitude_y", set(tr.amplitude_y)},
        {"period", set(tr.period)},           {"axis_a", set(tr.axis_a)},
        {"axis_b", set(tr.axis_b)},
    };
    const std::map<std::string, Setter> drift{
        {"kind", [&](const json& v, const std::string& k) { d.kind = parse_drift(read<std::string>(v, k), k); }},
        {"start_angle", set(d.start_angle)},
        {"rate", set(d.rate)},
        {"knots",
         [&](const json& v, const std::string& k) {
             if (!v.is_array()) {
                 throw ConfigError(fmt::format("config: '{}' must be an array", k));
             }
             d.knots.clear();
             for (std::size_t i = 0; i < v.size(); ++i) {
                 const auto& p = pair_at(v, i, k);
                 d.knots.push_back({read<std::int64_t>(p[0], k), read<double>(p[1], k)});
             }
         }},
        {"viewpoints", set(d.viewpoints)},
        {"dwell_min", set(d.dwell_min)},
        {"dwell_max", set(d.dwell_max)},
        {"ramp", set(d.ramp)},
    };
    const std::map<std::string, Setter> noise{
        {"score", set(s.noise.score)},
        {"embedding", set(s.noise.embedding)},
        {"occlusion", set(s.noise.occlusion)},
    };
    auto& fi = s.fidelity;
    const std::map<std::string, Setter> fidelity{
        {"base", set(fi.base)},
        {"gain", set(fi.gain)},
        {"persistence", set(fi.persistence)},
        {"anchor", set(fi.anchor)},
        {"contamination", set(fi.contamination)},
        {"occlusion_scale", set(fi.occlusion_scale)},
        {"occlusion_offset", set(fi.occlusion_offset)},
    };
    auto& de = s.detection;
    const std::map<std::string, Setter> detection{
        {"quality", set(de.quality)},
        {"jitter", set(de.jitter)},
        {"early_frames", set(de.early_frames)},
        {"early_quality", set(de.early_quality)},
        {"early_jitter", set(de.early_jitter)},
    };
    const std::map<std::string, Setter> tracker{
        {"delta_iou", set(t.delta_iou)},
        {"delta_o", set(t.delta_o)},
        {"n_w", set(t.n_w)},
        {"gamma_iou", set(t.gamma_iou)},
        {"n_p", set(t.n_p)},
        {"n_l", set(t.n_l)},
        {"short_term_capacity", set(t.short_term_capacity)},
        {"policy",
         [&](const json& v, const std::string& k) { t.policy = parse_policy(read<std::string>(v, k)); }},
        {"interval_every", set(t.interval_every)},
        {"interval_keep", set(t.interval_keep)},
    };
    auto nested = [&](const std::map<std::string, Setter>& setters) {
        return [&setters](const json& v, const std::string& k) { apply(v, setters, k); };
    };
    const std::map<std::string, Setter> top{
        {"scenario", [](const json&, const std::string&) {}},
        {"length", set(s.length)},
        {"height", set(s.height)},
        {"width", set(s.width)},
        {"embedding_dim", set(s.embedding_dim)},
        {"seed", set(s.seed)},
        {"trajectory", nested(trajectory)},
        {"presence",
         [&](const json& v, const std::string& k) {
             if (!v.is_array()) {
                 throw ConfigError(fmt::format("config: '{}' must be an array", k));
             }
             s.presence.clear();
             for (std::size_t i = 0; i < v.size(); ++i) {
                 const auto& p = pair_at(v, i, k);
                 s.presence.push_back({read<std::int64_t>(p[0], k), read<std::int64_t>(p[1], k)});
             }
         }},
        {"drift", nested(drift)},
        {"noise", nested(noise)},
        {"fidelity", nested(fidelity)},
        {"detection", nested(detection)},
        {"tracker", nested(tracker)},
    };
    apply(doc, top, "");
    s.validate();
    t.validate();
    return c;
}

SimulationConfig load_simulation_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(fmt::format("config: cannot open '{}'", path.string()));
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_simulation_config(text.str());
}

std::string to_json(const SimulationConfig& c) {
    const auto& s = c.script;
    const auto& tr = s.trajectory;
    const auto& d = s.drift;
    const auto& t = c.tracker;
    json presence = json::array();
    for (const auto& iv : s.presence) {
        presence.push_back({iv.start, iv.end});
    }
    json knots = json::array();
    for (const auto& k : d.knots) {
        knots.push_back({k.frame, k.angle});
    }
    json doc{
        {"length", s.length},
        {"height", s.height},
        {"width", s.width},
        {"embedding_dim", s.embedding_dim},
        {"seed", s.seed},
        {"trajectory",
         {{"shape", shape_name(tr.shape)},
          {"center_x", tr.center_x},
          {"center_y", tr.center_y},
          {"velocity_x", tr.velocity_x},
          {"velocity_y", tr.velocity_y},
          {"amplitude_x", tr.amplitude_x},
          {"amplitude_y", tr.amplitude_y},
          {"period", tr.period},
          {"axis_a", tr.axis_a},
          {"axis_b", tr.axis_b}}},
        {"presence", presence},
        {"drift",
         {{"kind", drift_name(d.kind)},
          {"start_angle", d.start_angle},
          {"rate", d.rate},
          {"knots", knots},
          {"viewpoints", d.viewpoints},
          {"dwell_min", d.dwell_min},
          {"dwell_max", d.dwell_max},
          {"ramp", d.ramp}}},
        {"noise", {{"score", s.noise.score}, {"embedding", s.noise.embedding}, {"occlusion", s.noise.occlusion}}},
        {"fidelity",
         {{"base", s.fidelity.base},
          {"gain", s.fidelity.gain},
          {"persistence", s.fidelity.persistence},
          {"anchor", s.fidelity.anchor},
          {"contamination", s.fidelity.contamination},
          {"occlusion_scale", s.fidelity.occlusion_scale},
          {"occlusion_offset", s.fidelity.occlusion_offset}}},
        {"detection",
         {{"quality", s.detection.quality},
          {"jitter", s.detection.jitter},
          {"early_frames", s.detection.early_frames},
          {"early_quality", s.detection.early_quality},
          {"early_jitter", s.detection.early_jitter}}},
        {"tracker",
         {{"delta_iou", t.delta_iou},
          {"delta_o", t.delta_o},
          {"n_w", t.n_w},
          {"gamma_iou", t.gamma_iou},
          {"n_p", t.n_p},
          {"n_l", t.n_l},
          {"short_term_capacity", t.short_term_capacity},
          {"policy", to_string(t.policy)},
          {"interval_every", t.interval_every},
          {"interval_keep", t.interval_keep}}},
    };
    return doc.dump(2) + "\n";
}

}  // namespace cltrack::sim

#include "cltrack/core/config.hpp"

#include <fmt/format.h>

#include "cltrack/core/error.hpp"

namespace cltrack {

std::string_view to_string(MemoryPolicy policy) {
    switch (policy) {
    case MemoryPolicy::Vanilla:
        return "vanilla";
    case MemoryPolicy::Extended:
        return "extended";
    case MemoryPolicy::Interval:
        return "interval";
    case MemoryPolicy::DLM:
        return "dlm";
    }
    return "unknown";
}

MemoryPolicy parse_policy(std::string_view name) {
    for (auto p : {MemoryPolicy::Vanilla, MemoryPolicy::Extended, MemoryPolicy::Interval,
                   MemoryPolicy::DLM}) {
        if (to_string(p) == name) {
            return p;
        }
    }
    throw ConfigError(fmt::format("unknown memory policy '{}'", name));
}

namespace {

void check_unit(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw ConfigError(fmt::format("{} must lie in [0, 1], got {}", name, v));
    }
}

void check_capacity(int v, const char* name) {
    if (v < 1) {
        throw ConfigError(fmt::format("{} must be >= 1, got {}", name, v));
    }
}

}  // namespace

void TrackerConfig::validate() const {
    check_unit(delta_iou, "delta_iou");
    check_unit(delta_o, "delta_o");
    check_unit(gamma_iou, "gamma_iou");
    check_capacity(n_w, "n_w");
    check_capacity(n_p, "n_p");
    check_capacity(n_l, "n_l");
    check_capacity(short_term_capacity, "short_term_capacity");
    check_capacity(interval_every, "interval_every");
    check_capacity(interval_keep, "interval_keep");
}

int TrackerConfig::effective_short_term_capacity() const {
    return policy == MemoryPolicy::Extended ? short_term_capacity + n_l : short_term_capacity;
}

}  // namespace cltrack

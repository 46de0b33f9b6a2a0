#pragma once

#include <string>
#include <string_view>

namespace cltrack {

enum class MemoryPolicy { Vanilla, Extended, Interval, DLM };

std::string_view to_string(MemoryPolicy policy);
/// Accepts the lower-case names "vanilla", "extended", "interval", "dlm".
MemoryPolicy parse_policy(std::string_view name);

struct TrackerConfig {
    // Initial-frame gate.
    double delta_iou = 0.7;
    double delta_o = 0.9;
    int n_w = 5;

    // Long-term memory.
    double gamma_iou = 0.95;
    int n_p = 5;
    int n_l = 4;

    int short_term_capacity = 6;
    MemoryPolicy policy = MemoryPolicy::DLM;

    // Interval baseline: store every `interval_every`-th tracked frame, keep the newest
    // `interval_keep` of them next to the permanent initial entry.
    int interval_every = 5;
    int interval_keep = 3;

    /// Throws ConfigError when a threshold leaves its range or a capacity is < 1.
    void validate() const;

    /// Short-term queue length the policy actually uses.
    int effective_short_term_capacity() const;
};

}  // namespace cltrack

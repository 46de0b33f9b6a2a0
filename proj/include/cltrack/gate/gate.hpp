#pragma once

#include <deque>
#include <optional>

#include "cltrack/core/config.hpp"
#include "cltrack/core/types.hpp"

namespace cltrack::gate {

/// Qualification: iou > delta_iou and sigmoid(occ) > delta_o, both strict.
bool qualifies(const ScoreReport& report, const TrackerConfig& config);

struct WindowEntry {
    FrameIndex frame;
    bool qualifies = false;
    double iou_score = 0.0;
};

struct InitialSelection {
    FrameIndex frame;
    ScoreReport report;
    FrameIndex decided_at;
};

/// Credible initial frame selection over a sliding window of the last n_w frames.
///
/// Every observed report is kept (mask and embedding included) while its frame is in the
/// window, so a selection decided at frame t can hand back the full prediction of any
/// frame in [t - n_w + 1, t]. Once a selection has been returned the gate is inert until
/// reset().
class GateState {
public:
    GateState() = default;

    /// Appends the report and returns a selection iff all n_w window entries qualify.
    /// Ties on iou_score go to the earliest frame.
    /// Throws PreconditionError on a non-increasing frame or when called while inert.
    std::optional<InitialSelection> observe(ScoreReport report, const TrackerConfig& config);

    void reset();

    const std::deque<WindowEntry>& window() const { return window_; }
    const std::deque<ScoreReport>& retained_reports() const { return retained_; }
    bool inert() const { return inert_; }
    std::size_t qualifying_count() const { return qualifying_; }

private:
    std::deque<WindowEntry> window_;
    std::deque<ScoreReport> retained_;
    std::size_t qualifying_ = 0;
    std::optional<FrameIndex> last_frame_;
    bool inert_ = false;
};

}  // namespace cltrack::gate

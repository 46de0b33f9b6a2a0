#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "cltrack/tracker/tracker.hpp"

namespace cltrack::tracker {

struct RunSummary {
    std::size_t frames = 0;
    std::size_t tracking_frames = 0;
    std::optional<FrameIndex> selected_frame;
    std::optional<FrameIndex> decided_at;
    /// Frames processed up to and including the decision frame.
    std::optional<std::int64_t> transition_latency;
    /// Frames between the selected initial frame and the decision frame.
    std::optional<std::int64_t> selection_lag;
    bool no_initial_frame = true;

    // Memory coverage over tracked frames (span as in MemorySnapshot::span()).
    double mean_span = 0.0;
    std::int64_t max_span = 0;
    double mean_context_size = 0.0;
    std::size_t max_context_size = 0;

    double mean_policy_time_ns = 0.0;
};

struct RunRecord {
    std::vector<StepOutput> steps;
    RunSummary summary;
};

/// Steps every payload through the tracker and calls finish() at the end.
RunRecord run_stream(Tracker& tracker, std::span<const FramePayload> stream);

RunSummary summarize(std::span<const StepOutput> steps);

struct ExportOptions {
    /// Wall-clock columns are not reproducible; they are written only on request.
    bool include_timing = false;
};

/// One JSON object per line. Each line carries the stream interchange keys for the
/// step's report plus "stage", "selection" and "memory".
void write_run_jsonl(std::ostream& out, std::span<const StepOutput> steps,
                     const ExportOptions& options = {});

/// Header: frame,stage,iou,occ_prob,mem_size,mem_span,policy_time_ns
/// policy_time_ns is left empty unless timing was requested.
void write_run_csv(std::ostream& out, std::span<const StepOutput> steps,
                   const ExportOptions& options = {});

}  // namespace cltrack::tracker

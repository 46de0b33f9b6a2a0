#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>

#include "cltrack/core/config.hpp"
#include "cltrack/gate/gate.hpp"
#include "cltrack/kernels/sensory.hpp"
#include "cltrack/memory/memory_bank.hpp"
#include "cltrack/tracker/backend.hpp"

namespace cltrack::tracker {

enum class Stage { Detecting, Tracking };

std::string_view to_string(Stage stage);

/// How the detection stage hands over to tracking.
enum class GateMode {
    Credible,         // sliding-window selection over n_w qualifying frames
    FirstQualifying,  // ablation: first single frame passing both thresholds
};

struct StepOutput {
    FrameIndex frame;
    Stage stage_after = Stage::Detecting;
    ScoreReport report;
    std::optional<gate::InitialSelection> selection;
    std::optional<memory::MemorySnapshot> memory_snapshot;
    std::int64_t policy_time_ns = 0;  // gate + memory bookkeeping, backend excluded
};

/// Two-stage tracker for one referred object on one stream.
///
/// Detecting: the backend runs with only sensory memory as temporal context and every
/// report goes through the gate. When the gate selects a frame, a MemoryBank is seeded
/// with that frame's retained report as the permanent initial entry (possibly a few
/// frames back) and the stage flips to Tracking. Reports between the selected frame and
/// the decision frame stay as emitted in detection mode.
///
/// Tracking: the backend is conditioned on the assembled memory context, and the new
/// report is fed to MemoryBank::update.
class Tracker {
public:
    Tracker(TrackerConfig config, std::shared_ptr<const SegmentationBackend> backend,
            Embedding text_embedding, GateMode gate_mode = GateMode::Credible);

    /// Throws PreconditionError on a non-increasing frame or after finish().
    StepOutput step(const FramePayload& payload);

    /// step() for a tracker built with GateMode::FirstQualifying; throws otherwise.
    StepOutput ablation_gate_step(const FramePayload& payload);

    /// Marks the end of the stream; further steps throw.
    void finish() { finished_ = true; }
    bool finished() const { return finished_; }

    Stage stage() const { return bank_ ? Stage::Tracking : Stage::Detecting; }
    GateMode gate_mode() const { return gate_mode_; }
    const TrackerConfig& config() const { return config_; }
    const gate::GateState& gate() const { return gate_; }
    const std::optional<memory::MemoryBank>& memory() const { return bank_; }
    const std::optional<gate::InitialSelection>& selection() const { return selection_; }
    const kernels::SensoryMemory& sensory() const { return sensory_; }
    const SegmentationBackend& backend() const { return *backend_; }

private:
    StepOutput detect(const FramePayload& payload);
    StepOutput track(const FramePayload& payload);

    TrackerConfig config_;
    std::shared_ptr<const SegmentationBackend> backend_;
    Embedding text_;
    GateMode gate_mode_;
    gate::GateState gate_;
    std::optional<memory::MemoryBank> bank_;
    std::optional<gate::InitialSelection> selection_;
    std::vector<memory::MemoryEntry> context_;
    kernels::SensoryMemory sensory_;
    std::optional<FrameIndex> last_frame_;
    bool finished_ = false;
};

}  // namespace cltrack::tracker

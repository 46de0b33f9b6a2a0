#include "cltrack/tracker/tracker.hpp"

#include <chrono>

#include <fmt/format.h>

#include "cltrack/core/error.hpp"

namespace cltrack::tracker {

std::string_view to_string(Stage stage) {
    return stage == Stage::Detecting ? "detecting" : "tracking";
}

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point since) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - since).count();
}

}  // namespace

Tracker::Tracker(TrackerConfig config, std::shared_ptr<const SegmentationBackend> backend,
                 Embedding text_embedding, GateMode gate_mode)
    : config_(config),
      backend_(std::move(backend)),
      text_(std::move(text_embedding)),
      gate_mode_(gate_mode) {
    config_.validate();
    if (!backend_) {
        throw PreconditionError("tracker: backend is required");
    }
    if (text_.empty()) {
        throw PreconditionError("tracker: text embedding is required");
    }
}

StepOutput Tracker::step(const FramePayload& payload) {
    if (finished_) {
        throw PreconditionError("tracker: step after end of stream");
    }
    if (last_frame_ && payload.frame <= *last_frame_) {
        throw PreconditionError(fmt::format("tracker: frame {} does not follow frame {}",
                                            payload.frame.value, last_frame_->value));
    }
    last_frame_ = payload.frame;
    auto out = bank_ ? track(payload) : detect(payload);
    if (!payload.features.empty()) {
        sensory_.update(payload.features, payload.frame);
    }
    return out;
}

StepOutput Tracker::ablation_gate_step(const FramePayload& payload) {
    if (gate_mode_ != GateMode::FirstQualifying) {
        throw PreconditionError("tracker: ablation_gate_step requires GateMode::FirstQualifying");
    }
    return step(payload);
}

StepOutput Tracker::detect(const FramePayload& payload) {
    BackendRequest request{BackendMode::Detect, payload, text_, {}, sensory_};
    ScoreReport report = backend_->segment(request);
    if (report.frame != payload.frame) {
        throw Error(fmt::format("backend returned frame {} for frame {}", report.frame.value,
                                payload.frame.value));
    }

    const auto start = Clock::now();
    StepOutput out;
    out.frame = payload.frame;
    std::optional<gate::InitialSelection> selection;
    if (gate_mode_ == GateMode::Credible) {
        selection = gate_.observe(report, config_);
    } else if (gate::qualifies(report, config_)) {
        selection = gate::InitialSelection{report.frame, report, report.frame};
    }
    if (selection) {
        bank_.emplace(selection->report, config_);
        selection_ = selection;
        out.selection = std::move(selection);
        out.memory_snapshot = bank_->snapshot();
    }
    out.policy_time_ns = elapsed_ns(start);
    out.stage_after = stage();
    out.report = std::move(report);
    return out;
}

StepOutput Tracker::track(const FramePayload& payload) {
    auto start = Clock::now();
    context_ = bank_->assemble_context();
    std::int64_t bookkeeping = elapsed_ns(start);

    BackendRequest request{BackendMode::Track, payload, text_, context_, sensory_};
    ScoreReport report = backend_->segment(request);
    if (report.frame != payload.frame) {
        throw Error(fmt::format("backend returned frame {} for frame {}", report.frame.value,
                                payload.frame.value));
    }

    start = Clock::now();
    bank_->update(report);
    StepOutput out;
    out.frame = payload.frame;
    out.stage_after = Stage::Tracking;
    out.memory_snapshot = bank_->snapshot();
    bookkeeping += elapsed_ns(start);
    out.policy_time_ns = bookkeeping;
    out.report = std::move(report);
    return out;
}

}  // namespace cltrack::tracker

#include "cltrack/gate/gate.hpp"

#include <fmt/format.h>

#include "cltrack/core/error.hpp"
#include "cltrack/core/fault.hpp"
#include "cltrack/core/math.hpp"

namespace cltrack::gate {

bool qualifies(const ScoreReport& report, const TrackerConfig& config) {
    return report.iou_score > config.delta_iou && sigmoid(report.occlusion_logit) > config.delta_o;
}

std::optional<InitialSelection> GateState::observe(ScoreReport report,
                                                   const TrackerConfig& config) {
    if (inert_) {
        throw PreconditionError("gate: observe after selection without reset");
    }
    if (last_frame_ && report.frame <= *last_frame_) {
        throw PreconditionError(fmt::format("gate: frame {} does not follow frame {}",
                                            report.frame.value, last_frame_->value));
    }
    last_frame_ = report.frame;

    std::size_t capacity = static_cast<std::size_t>(config.n_w);
    if (fault::active(fault::Fault::GateWindowOffByOne) && capacity > 1) {
        --capacity;
    }

    const bool ok = qualifies(report, config);
    window_.push_back({report.frame, ok, report.iou_score});
    retained_.push_back(std::move(report));
    qualifying_ += ok ? 1 : 0;
    while (window_.size() > capacity) {
        qualifying_ -= window_.front().qualifies ? 1 : 0;
        window_.pop_front();
        retained_.pop_front();
    }

    if (window_.size() < capacity || qualifying_ != window_.size()) {
        return std::nullopt;
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < window_.size(); ++i) {
        if (window_[i].iou_score > window_[best].iou_score) {
            best = i;
        }
    }
    inert_ = true;
    return InitialSelection{window_[best].frame, retained_[best], window_.back().frame};
}

void GateState::reset() {
    window_.clear();
    retained_.clear();
    qualifying_ = 0;
    last_frame_.reset();
    inert_ = false;
}

}  // namespace cltrack::gate

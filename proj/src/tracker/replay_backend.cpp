#include "cltrack/tracker/replay_backend.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "cltrack/core/error.hpp"

namespace cltrack::tracker {

ReplayBackend::ReplayBackend(std::vector<StreamRecord> records) : records_(std::move(records)) {
    for (std::size_t i = 1; i < records_.size(); ++i) {
        if (records_[i].report.frame <= records_[i - 1].report.frame) {
            throw ConfigError("replay: frame indices must strictly increase");
        }
    }
}

BackendCapabilities ReplayBackend::capabilities() const {
    if (records_.empty()) {
        return {};
    }
    const auto& r = records_.front().report;
    return {r.embedding ? r.embedding->dim() : 0, r.mask.height(), r.mask.width()};
}

ScoreReport ReplayBackend::segment(const BackendRequest& request) const {
    const auto frame = request.payload.frame;
    auto it = std::lower_bound(records_.begin(), records_.end(), frame,
                               [](const StreamRecord& r, FrameIndex f) { return r.report.frame < f; });
    if (it == records_.end() || it->report.frame != frame) {
        throw Error(fmt::format("replay: no record for frame {}", frame.value));
    }
    return it->report;
}

std::vector<FramePayload> ReplayBackend::payloads() const {
    std::vector<FramePayload> out;
    out.reserve(records_.size());
    for (const auto& r : records_) {
        out.push_back(FramePayload{r.report.frame, {}});
    }
    return out;
}

}  // namespace cltrack::tracker

#pragma once

#include <vector>

#include "cltrack/core/stream_io.hpp"
#include "cltrack/tracker/backend.hpp"

namespace cltrack::tracker {

/// Serves pre-recorded reports (the JSON-lines interchange format) by frame index,
/// ignoring memory and sensory context.
class ReplayBackend final : public SegmentationBackend {
public:
    explicit ReplayBackend(std::vector<StreamRecord> records);

    BackendCapabilities capabilities() const override;
    std::string name() const override { return "replay"; }
    ScoreReport segment(const BackendRequest& request) const override;

    const std::vector<StreamRecord>& records() const { return records_; }

    /// One payload per record, features empty.
    std::vector<FramePayload> payloads() const;

private:
    std::vector<StreamRecord> records_;
};

}  // namespace cltrack::tracker

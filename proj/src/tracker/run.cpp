#include "cltrack/tracker/run.hpp"

#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "cltrack/core/math.hpp"
#include "cltrack/core/stream_io.hpp"

namespace cltrack::tracker {

RunRecord run_stream(Tracker& tracker, std::span<const FramePayload> stream) {
    RunRecord rec;
    rec.steps.reserve(stream.size());
    for (const auto& payload : stream) {
        if (tracker.gate_mode() == GateMode::FirstQualifying) {
            rec.steps.push_back(tracker.ablation_gate_step(payload));
        } else {
            rec.steps.push_back(tracker.step(payload));
        }
    }
    tracker.finish();
    rec.summary = summarize(rec.steps);
    return rec;
}

RunSummary summarize(std::span<const StepOutput> steps) {
    RunSummary s;
    s.frames = steps.size();
    double span_sum = 0.0;
    double size_sum = 0.0;
    double time_sum = 0.0;
    for (const auto& st : steps) {
        time_sum += static_cast<double>(st.policy_time_ns);
        if (st.selection) {
            s.selected_frame = st.selection->frame;
            s.decided_at = st.selection->decided_at;
            s.transition_latency = st.selection->decided_at - steps.front().frame + 1;
            s.selection_lag = st.selection->decided_at - st.selection->frame;
            s.no_initial_frame = false;
            continue;
        }
        if (st.stage_after == Stage::Tracking && st.memory_snapshot) {
            ++s.tracking_frames;
            const auto span = st.memory_snapshot->span();
            span_sum += static_cast<double>(span);
            s.max_span = std::max(s.max_span, span);
            size_sum += static_cast<double>(st.memory_snapshot->size());
            s.max_context_size = std::max(s.max_context_size, st.memory_snapshot->size());
        }
    }
    if (s.tracking_frames > 0) {
        s.mean_span = span_sum / static_cast<double>(s.tracking_frames);
        s.mean_context_size = size_sum / static_cast<double>(s.tracking_frames);
    }
    if (s.frames > 0) {
        s.mean_policy_time_ns = time_sum / static_cast<double>(s.frames);
    }
    return s;
}

void write_run_jsonl(std::ostream& out, std::span<const StepOutput> steps,
                     const ExportOptions& options) {
    for (const auto& st : steps) {
        auto j = nlohmann::json::parse(to_json_line(StreamRecord{st.report, std::nullopt}));
        j["stage"] = std::string(to_string(st.stage_after));
        if (st.selection) {
            j["selection"] = {{"frame", st.selection->frame.value},
                              {"decided_at", st.selection->decided_at.value}};
        } else {
            j["selection"] = nullptr;
        }
        if (st.memory_snapshot) {
            j["memory"] = nlohmann::json::parse(st.memory_snapshot->to_json());
        } else {
            j["memory"] = nullptr;
        }
        if (options.include_timing) {
            j["policy_time_ns"] = st.policy_time_ns;
        }
        out << j.dump() << '\n';
    }
}

void write_run_csv(std::ostream& out, std::span<const StepOutput> steps,
                   const ExportOptions& options) {
    out << "frame,stage,iou,occ_prob,mem_size,mem_span,policy_time_ns\n";
    for (const auto& st : steps) {
        const auto size = st.memory_snapshot ? st.memory_snapshot->size() : 0;
        const auto span = st.memory_snapshot ? st.memory_snapshot->span() : 0;
        out << fmt::format("{},{},{:.6f},{:.6f},{},{},", st.frame.value, to_string(st.stage_after),
                           st.report.iou_score, sigmoid(st.report.occlusion_logit), size, span);
        if (options.include_timing) {
            out << st.policy_time_ns;
        }
        out << '\n';
    }
}

}  // namespace cltrack::tracker

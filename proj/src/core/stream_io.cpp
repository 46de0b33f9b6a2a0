#include "cltrack/core/stream_io.hpp"

#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "cltrack/core/error.hpp"
#include "cltrack/core/rle.hpp"

namespace cltrack {

using nlohmann::json;

std::string to_json_line(const StreamRecord& record) {
    const auto& r = record.report;
    json j;
    j["frame"] = r.frame.value;
    j["iou"] = r.iou_score;
    j["occ_logit"] = r.occlusion_logit;
    j["embedding"] = r.embedding ? std::vector<double>(r.embedding->values().begin(),
                                                      r.embedding->values().end())
                                 : std::vector<double>{};
    j["height"] = r.mask.height();
    j["width"] = r.mask.width();
    j["mask_rle"] = rle::encode(r.mask);
    if (record.ground_truth) {
        j["gt_mask_rle"] = rle::encode(*record.ground_truth);
    }
    return j.dump();
}

StreamRecord parse_json_line(const std::string& line, int fallback_height, int fallback_width) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("stream: malformed JSON record: {}", e.what()));
    }
    try {
        StreamRecord rec;
        auto& r = rec.report;
        r.frame = FrameIndex{j.at("frame").get<std::int64_t>()};
        if (r.frame.value < 0) {
            throw ConfigError("stream: negative frame index");
        }
        r.iou_score = j.at("iou").get<double>();
        if (!(r.iou_score >= 0.0 && r.iou_score <= 1.0)) {
            throw ConfigError(fmt::format("stream: iou {} outside [0, 1]", r.iou_score));
        }
        r.occlusion_logit = j.at("occ_logit").get<double>();
        if (auto it = j.find("embedding"); it != j.end() && !it->empty()) {
            r.embedding = Embedding(it->get<std::vector<double>>());
        }
        const int h = j.contains("height") ? j["height"].get<int>() : fallback_height;
        const int w = j.contains("width") ? j["width"].get<int>() : fallback_width;
        if (h <= 0 || w <= 0) {
            throw ConfigError("stream: mask dimensions unknown (no height/width)");
        }
        r.mask = rle::decode(j.at("mask_rle").get<std::vector<std::uint32_t>>(), h, w);
        if (auto it = j.find("gt_mask_rle"); it != j.end()) {
            rec.ground_truth = rle::decode(it->get<std::vector<std::uint32_t>>(), h, w);
        }
        return rec;
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("stream: bad record field: {}", e.what()));
    }
}

std::vector<StreamRecord> read_stream(std::istream& in, int fallback_height, int fallback_width) {
    std::vector<StreamRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            auto rec = parse_json_line(line, fallback_height, fallback_width);
            if (!out.empty() && rec.report.frame <= out.back().report.frame) {
                throw ConfigError("stream: frame indices must strictly increase");
            }
            if (!out.empty() && !rec.report.mask.same_shape(out.back().report.mask)) {
                throw ConfigError("stream: mask dimensions changed mid-stream");
            }
            out.push_back(std::move(rec));
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("line {}: {}", line_no, e.what()));
        }
    }
    return out;
}

void write_stream(std::ostream& out, const std::vector<StreamRecord>& records) {
    for (const auto& r : records) {
        out << to_json_line(r) << '\n';
    }
}

}  // namespace cltrack

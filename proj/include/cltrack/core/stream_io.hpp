#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cltrack/core/types.hpp"

namespace cltrack {

/// One line of the JSON-lines stream interchange format.
struct StreamRecord {
    ScoreReport report;
    std::optional<MaskGrid> ground_truth;
};

/// Serializes a record as a single JSON object (no trailing newline).
/// Keys: frame, iou, occ_logit, embedding, height, width, mask_rle[, gt_mask_rle].
std::string to_json_line(const StreamRecord& record);

/// Parses one line. `height`/`width` keys in the record take precedence over the
/// fallback dimensions; a record with neither throws ConfigError.
StreamRecord parse_json_line(const std::string& line, int fallback_height = 0,
                             int fallback_width = 0);

/// Reads every non-blank line; frame indices must strictly increase.
std::vector<StreamRecord> read_stream(std::istream& in, int fallback_height = 0,
                                      int fallback_width = 0);

void write_stream(std::ostream& out, const std::vector<StreamRecord>& records);

}  // namespace cltrack

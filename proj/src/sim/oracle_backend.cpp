#include "cltrack/sim/oracle_backend.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include <fmt/format.h>

#include "cltrack/core/error.hpp"
#include "cltrack/core/math.hpp"
#include "cltrack/core/random.hpp"

namespace cltrack::sim {

namespace {

constexpr double kScoreNoiseBound = 3.5;

enum Stream : std::uint64_t { kDetectStream = 1, kSynthStream = 2 };

/// 4-connected distance of every cell to the nearest cell where `source` is true;
/// the area outside the grid counts as a source when `border_is_source`.
std::vector<int> distance_from(const MaskGrid& m, bool source, bool border_is_source) {
    const int h = m.height();
    const int w = m.width();
    std::vector<int> dist(m.size(), -1);
    std::deque<int> queue;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const int i = r * w + c;
            if (m[static_cast<std::size_t>(i)] == source) {
                dist[static_cast<std::size_t>(i)] = 0;
                queue.push_back(i);
            } else if (border_is_source && (r == 0 || c == 0 || r == h - 1 || c == w - 1)) {
                dist[static_cast<std::size_t>(i)] = 1;
                queue.push_back(i);
            }
        }
    }
    while (!queue.empty()) {
        const int i = queue.front();
        queue.pop_front();
        const int r = i / w;
        const int c = i % w;
        const int next = dist[static_cast<std::size_t>(i)] + 1;
        const int nbr[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
        for (const auto& n : nbr) {
            if (n[0] < 0 || n[0] >= h || n[1] < 0 || n[1] >= w) {
                continue;
            }
            const auto j = static_cast<std::size_t>(n[0] * w + n[1]);
            if (dist[j] < 0) {
                dist[j] = next;
                queue.push_back(static_cast<int>(j));
            }
        }
    }
    return dist;
}

}  // namespace

MaskGrid degrade_mask(const MaskGrid& gt, double q, bool dilate) {
    q = std::clamp(q, 0.0, 1.0);
    const std::size_t n = gt.count();
    if (n == 0 || q >= 1.0) {
        return gt;
    }
    const std::size_t background = gt.size() - n;
    if (dilate && q > 0.0) {
        const auto extra = static_cast<std::size_t>(
            std::llround(static_cast<double>(n) / q - static_cast<double>(n)));
        if (extra <= background) {
            const auto dist = distance_from(gt, true, false);
            std::vector<std::size_t> order;
            order.reserve(background);
            for (std::size_t i = 0; i < gt.size(); ++i) {
                if (!gt[i]) {
                    order.push_back(i);
                }
            }
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
            std::vector<std::uint8_t> cells(gt.cells().begin(), gt.cells().end());
            for (std::size_t k = 0; k < extra; ++k) {
                cells[order[k]] = 1;
            }
            return MaskGrid(gt.height(), gt.width(), std::move(cells));
        }
    }
    const auto keep = static_cast<std::size_t>(std::llround(q * static_cast<double>(n)));
    const auto depth = distance_from(gt, false, true);
    std::vector<std::size_t> order;
    order.reserve(n);
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (gt[i]) {
            order.push_back(i);
        }
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return depth[a] > depth[b]; });
    std::vector<std::uint8_t> cells(gt.size(), 0);
    for (std::size_t k = 0; k < keep; ++k) {
        cells[order[k]] = 1;
    }
    return MaskGrid(gt.height(), gt.width(), std::move(cells));
}

OracleBackend::OracleBackend(std::shared_ptr<const Scene> scene, std::uint64_t seed)
    : scene_(std::move(scene)), seed_(seed) {
    if (!scene_) {
        throw PreconditionError("oracle backend: scene is required");
    }
}

tracker::BackendCapabilities OracleBackend::capabilities() const {
    return {static_cast<std::size_t>(scene_->script.embedding_dim), scene_->script.height,
            scene_->script.width};
}

double OracleBackend::decode_contamination(const Embedding& e) const {
    const double plane = std::hypot(e[kViewpointAxisX], e[kViewpointAxisY]);
    const double weight = scene_->script.fidelity.contamination;
    if (!(plane > 1e-9) || !(weight > 0.0)) {
        return 1.0;
    }
    return std::clamp(e[kContaminationAxis] / (weight * plane), 0.0, 1.0);
}

OracleBackend::Quality OracleBackend::target_quality(const tracker::BackendRequest& request) const {
    const auto f = request.payload.frame.value;
    if (f < 0 || f >= static_cast<std::int64_t>(scene_->truth.size())) {
        throw PreconditionError(fmt::format("oracle backend: frame {} outside the scene", f));
    }
    const auto& script = scene_->script;
    if (request.mode == tracker::BackendMode::Detect) {
        Rng rng(mix_seed(mix_seed(seed_, kDetectStream), static_cast<std::uint64_t>(f)));
        const auto& d = script.detection;
        const bool early = f < d.early_frames;
        const double q =
            std::clamp(rng.normal(early ? d.early_quality : d.quality,
                                  early ? d.early_jitter : d.jitter),
                       0.0, 1.0);
        return {q, 1.0 - q};
    }
    if (request.context.empty()) {
        throw PreconditionError("oracle backend: tracking request with an empty memory context");
    }
    const auto& view = scene_->truth.viewpoints[static_cast<std::size_t>(f)];
    double best = -1.0;
    const memory::MemoryEntry* best_entry = nullptr;
    for (const auto& e : request.context) {
        const double sim = cosine_similarity(e.embedding, view);
        if (sim > best) {
            best = sim;
            best_entry = &e;
        }
    }
    const auto& fid = script.fidelity;
    const double q = std::clamp(fid.base + fid.gain * best, 0.0, 1.0);
    const auto initial = std::find_if(request.context.begin(), request.context.end(), [](const auto& e) {
        return e.kind == memory::EntryKind::Initial;
    });
    const double from_best = decode_contamination(best_entry->embedding);
    const double from_initial =
        initial == request.context.end() ? from_best : decode_contamination(initial->embedding);
    const double inherited = fid.anchor * from_initial + (1.0 - fid.anchor) * from_best;
    return {q, fid.persistence * inherited + (1.0 - fid.persistence) * (1.0 - q)};
}

ScoreReport OracleBackend::segment(const tracker::BackendRequest& request) const {
    const auto quality = target_quality(request);
    const auto f = request.payload.frame.value;
    const auto idx = static_cast<std::size_t>(f);
    const auto& script = scene_->script;
    const auto& gt = scene_->truth.masks[idx];
    Rng rng(mix_seed(mix_seed(seed_, kSynthStream),
                     static_cast<std::uint64_t>(f) * 2 +
                         (request.mode == tracker::BackendMode::Track ? 1 : 0)));

    ScoreReport r;
    r.frame = request.payload.frame;
    const auto& fid = script.fidelity;
    std::vector<double> emb(static_cast<std::size_t>(script.embedding_dim), 0.0);
    if (scene_->truth.present[idx]) {
        r.mask = degrade_mask(gt, quality.q, rng.coin());
        r.occlusion_logit = fid.occlusion_scale * (quality.q - fid.occlusion_offset) +
                            rng.normal(0.0, script.noise.occlusion);
        const auto& view = scene_->truth.viewpoints[idx];
        for (std::size_t i = 0; i < emb.size(); ++i) {
            emb[i] = view[i];
        }
        emb[kContaminationAxis] += fid.contamination * quality.contamination;
    } else {
        r.mask = MaskGrid(script.height, script.width);
        r.occlusion_logit = -(fid.occlusion_scale * (0.5 + quality.q) +
                              std::abs(rng.normal(0.0, script.noise.occlusion)));
        emb[kBackgroundAxis] = 1.0;
    }
    for (auto& v : emb) {
        v += rng.normal(0.0, script.noise.embedding);
    }
    r.embedding = Embedding(std::move(emb));
    const double realized = region_iou(r.mask, gt);
    r.iou_score = std::clamp(realized + rng.truncated_normal(script.noise.score, kScoreNoiseBound),
                             0.0, 1.0);
    return r;
}

}  // namespace cltrack::sim

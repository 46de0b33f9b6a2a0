#include "cltrack/sim/metrics.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include <fmt/format.h>

#include "cltrack/core/error.hpp"

namespace cltrack::sim {

namespace {

void require_same_shape(const MaskGrid& pred, const MaskGrid& gt) {
    if (!pred.same_shape(gt)) {
        throw PreconditionError(fmt::format("mask shape mismatch: {}x{} vs {}x{}", pred.height(),
                                            pred.width(), gt.height(), gt.width()));
    }
}

void require_sequences(std::span<const MaskGrid> pred, std::span<const MaskGrid> gt) {
    if (pred.size() != gt.size()) {
        throw PreconditionError(
            fmt::format("sequence length mismatch: {} vs {}", pred.size(), gt.size()));
    }
    if (pred.empty()) {
        throw PreconditionError("cannot evaluate an empty sequence");
    }
}

/// Hopcroft-Karp over an adjacency list from left to right vertices.
class Matcher {
public:
    Matcher(std::vector<std::vector<std::size_t>> adj, std::size_t right)
        : adj_(std::move(adj)),
          match_left_(adj_.size(), kNone),
          match_right_(right, kNone),
          dist_(adj_.size()) {}

    std::size_t run() {
        std::size_t matched = 0;
        while (bfs()) {
            for (std::size_t u = 0; u < adj_.size(); ++u) {
                if (match_left_[u] == kNone && dfs(u)) {
                    ++matched;
                }
            }
        }
        return matched;
    }

private:
    static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

    bool bfs() {
        std::deque<std::size_t> queue;
        bool found = false;
        for (std::size_t u = 0; u < adj_.size(); ++u) {
            if (match_left_[u] == kNone) {
                dist_[u] = 0;
                queue.push_back(u);
            } else {
                dist_[u] = kNone;
            }
        }
        while (!queue.empty()) {
            const auto u = queue.front();
            queue.pop_front();
            for (const auto v : adj_[u]) {
                const auto w = match_right_[v];
                if (w == kNone) {
                    found = true;
                } else if (dist_[w] == kNone) {
                    dist_[w] = dist_[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        return found;
    }

    bool dfs(std::size_t u) {
        for (const auto v : adj_[u]) {
            const auto w = match_right_[v];
            if (w == kNone || (dist_[w] == dist_[u] + 1 && dfs(w))) {
                match_left_[u] = v;
                match_right_[v] = u;
                return true;
            }
        }
        dist_[u] = kNone;
        return false;
    }

    std::vector<std::vector<std::size_t>> adj_;
    std::vector<std::size_t> match_left_;
    std::vector<std::size_t> match_right_;
    std::vector<std::size_t> dist_;
};

}  // namespace

std::vector<std::size_t> boundary_pixels(const MaskGrid& mask) {
    std::vector<std::size_t> out;
    const int h = mask.height();
    const int w = mask.width();
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (!mask.at(r, c)) {
                continue;
            }
            const bool edge = r == 0 || c == 0 || r == h - 1 || c == w - 1 ||
                              !mask.at(r - 1, c) || !mask.at(r + 1, c) || !mask.at(r, c - 1) ||
                              !mask.at(r, c + 1);
            if (edge) {
                out.push_back(static_cast<std::size_t>(r) * static_cast<std::size_t>(w) +
                              static_cast<std::size_t>(c));
            }
        }
    }
    return out;
}

std::size_t match_boundaries(std::span<const std::size_t> a, std::span<const std::size_t> b,
                             int width, double tolerance) {
    if (width <= 0) {
        throw PreconditionError("match_boundaries: width must be positive");
    }
    if (!(tolerance >= 0.0)) {
        throw PreconditionError("match_boundaries: tolerance must be non-negative");
    }
    if (a.empty() || b.empty()) {
        return 0;
    }
    const auto w = static_cast<std::size_t>(width);
    const double tol2 = tolerance * tolerance;
    std::vector<std::vector<std::size_t>> adj(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto ra = static_cast<double>(a[i] / w);
        const auto ca = static_cast<double>(a[i] % w);
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double dr = static_cast<double>(b[j] / w) - ra;
            const double dc = static_cast<double>(b[j] % w) - ca;
            if (dr * dr + dc * dc <= tol2) {
                adj[i].push_back(j);
            }
        }
    }
    return Matcher(std::move(adj), b.size()).run();
}

double frame_j(const MaskGrid& pred, const MaskGrid& gt) {
    require_same_shape(pred, gt);
    const bool pe = pred.is_empty();
    const bool ge = gt.is_empty();
    if (pe && ge) {
        return 1.0;
    }
    if (pe || ge) {
        return 0.0;
    }
    return region_iou(pred, gt);
}

double frame_f(const MaskGrid& pred, const MaskGrid& gt, double tolerance) {
    require_same_shape(pred, gt);
    const bool pe = pred.is_empty();
    const bool ge = gt.is_empty();
    if (pe && ge) {
        return 1.0;
    }
    if (pe || ge) {
        return 0.0;
    }
    const auto bp = boundary_pixels(pred);
    const auto bg = boundary_pixels(gt);
    const auto m = static_cast<double>(match_boundaries(bp, bg, gt.width(), tolerance));
    const double precision = m / static_cast<double>(bp.size());
    const double recall = m / static_cast<double>(bg.size());
    if (precision + recall <= 0.0) {
        return 0.0;
    }
    return 2.0 * precision * recall / (precision + recall);
}

double evaluate_j(std::span<const MaskGrid> pred, std::span<const MaskGrid> gt) {
    require_sequences(pred, gt);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        sum += frame_j(pred[i], gt[i]);
    }
    return sum / static_cast<double>(pred.size());
}

double evaluate_f(std::span<const MaskGrid> pred, std::span<const MaskGrid> gt,
                  double tolerance) {
    require_sequences(pred, gt);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        sum += frame_f(pred[i], gt[i], tolerance);
    }
    return sum / static_cast<double>(pred.size());
}

double jf_mean(double j, double f) {
    if (!(j >= 0.0 && j <= 1.0 && f >= 0.0 && f <= 1.0)) {
        throw PreconditionError(fmt::format("jf_mean: scores must lie in [0, 1], got {} and {}", j, f));
    }
    return (j + f) / 2.0;
}

}  // namespace cltrack::sim

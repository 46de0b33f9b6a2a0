#include "cltrack/verify/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include <fmt/format.h>

#include "cltrack/core/error.hpp"
#include "cltrack/core/math.hpp"
#include "cltrack/core/random.hpp"
#include "cltrack/gate/gate.hpp"
#include "cltrack/kernels/grad_check.hpp"
#include "cltrack/kernels/layers.hpp"
#include "cltrack/kernels/scan.hpp"
#include "cltrack/memory/memory_bank.hpp"
#include "cltrack/sim/metrics.hpp"

namespace cltrack::verify {

namespace {

constexpr std::size_t kMaxReported = 5;

class Recorder {
public:
    explicit Recorder(std::string name) { result_.name = std::move(name); }

    void check(bool ok, const std::function<std::string()>& what) {
        ++result_.cases;
        if (!ok) {
            ++result_.failed;
            if (result_.failures.size() < kMaxReported) {
                result_.failures.push_back(what());
            }
        }
    }

    SuiteResult take() { return std::move(result_); }

private:
    SuiteResult result_;
};

// ---------------------------------------------------------------------------
// gate

struct Decision {
    std::int64_t selected = -1;
    std::int64_t decided_at = -1;
};

/// Re-evaluates the full window condition at every frame.
Decision brute_force_gate(const std::vector<ScoreReport>& stream, const TrackerConfig& cfg) {
    const auto n = static_cast<std::int64_t>(stream.size());
    for (std::int64_t t = cfg.n_w - 1; t < n; ++t) {
        bool all = true;
        for (std::int64_t k = t - cfg.n_w + 1; k <= t; ++k) {
            const auto& r = stream[static_cast<std::size_t>(k)];
            const double p = 1.0 / (1.0 + std::exp(-r.occlusion_logit));
            all = all && r.iou_score > cfg.delta_iou && p > cfg.delta_o;
        }
        if (all) {
            std::int64_t best = t - cfg.n_w + 1;
            for (std::int64_t k = best + 1; k <= t; ++k) {
                if (stream[static_cast<std::size_t>(k)].iou_score >
                    stream[static_cast<std::size_t>(best)].iou_score) {
                    best = k;
                }
            }
            return {stream[static_cast<std::size_t>(best)].frame.value,
                    stream[static_cast<std::size_t>(t)].frame.value};
        }
    }
    return {};
}

SuiteResult gate_suite(std::uint64_t seed) {
    Recorder rec("gate");
    Rng rng(mix_seed(seed, 0x6a7e));
    for (int s = 0; s < 1000; ++s) {
        TrackerConfig cfg;
        cfg.delta_iou = rng.uniform(0.3, 0.9);
        cfg.delta_o = rng.uniform(0.5, 0.95);
        cfg.n_w = static_cast<int>(rng.uniform_int(1, 8));
        const double pass = rng.uniform(0.5, 0.98);
        const auto len = rng.uniform_int(0, 200);
        std::vector<ScoreReport> stream;
        std::int64_t frame = rng.uniform_int(0, 3);
        for (std::int64_t i = 0; i < len; ++i) {
            ScoreReport r;
            r.frame = FrameIndex{frame};
            frame += rng.uniform_int(1, 2);
            const bool good = rng.uniform() < pass;
            // Quantized scores produce frequent iou ties and exact threshold hits.
            r.iou_score = good ? std::round(rng.uniform(cfg.delta_iou, 1.0) * 50.0) / 50.0
                               : rng.uniform(0.0, 1.0);
            r.occlusion_logit = good ? rng.uniform(3.0, 8.0) : rng.uniform(-4.0, 4.0);
            stream.push_back(std::move(r));
        }
        const auto expected = brute_force_gate(stream, cfg);
        gate::GateState state;
        Decision got;
        for (const auto& r : stream) {
            if (auto sel = state.observe(r, cfg)) {
                got = {sel->frame.value, sel->decided_at.value};
                break;
            }
        }
        rec.check(got.selected == expected.selected && got.decided_at == expected.decided_at, [&] {
            return fmt::format("stream {}: gate selected {} at {}, oracle {} at {}", s,
                               got.selected, got.decided_at, expected.selected,
                               expected.decided_at);
        });
    }
    return rec.take();
}

// ---------------------------------------------------------------------------
// memory

Embedding random_embedding(Rng& rng, int dim, std::span<const Embedding> palette) {
    if (!palette.empty() && rng.uniform() < 0.3) {
        return palette[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(palette.size()) - 1))];
    }
    std::vector<double> v(static_cast<std::size_t>(dim));
    for (auto& x : v) {
        x = rng.normal();
    }
    if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) {
        v[0] = 1.0;
    }
    return Embedding(std::move(v));
}

SuiteResult memory_suite(std::uint64_t seed) {
    Recorder rec("memory");
    Rng rng(mix_seed(seed, 0x3e3));

    for (int s = 0; s < 1000; ++s) {
        const int dim = static_cast<int>(rng.uniform_int(2, 6));
        const int cap = static_cast<int>(rng.uniform_int(1, 8));
        std::vector<Embedding> palette;
        for (int i = 0; i < 3; ++i) {
            palette.push_back(random_embedding(rng, dim, {}));
        }
        memory::CandidatePool pool(cap);
        std::int64_t frame = 10;
        while (!pool.full()) {
            memory::MemoryEntry e{FrameIndex{frame}, random_embedding(rng, dim, palette), 0.99,
                                  memory::EntryKind::ShortTerm};
            frame += rng.uniform_int(1, 3);
            pool.offer(std::move(e), 0.5);
        }
        const memory::MemoryEntry latest{FrameIndex{0}, random_embedding(rng, dim, palette), 1.0,
                                          memory::EntryKind::LongTerm};
        const auto candidates = pool.entries();
        std::size_t best = 0;
        double best_sim = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const double sim = cosine_similarity(candidates[i].embedding, latest.embedding);
            if (sim < best_sim) {
                best_sim = sim;
                best = i;
            }
        }
        const auto chosen = memory::select_diverse(pool, latest);
        rec.check(chosen.frame == candidates[best].frame, [&] {
            return fmt::format("pool {}: selected frame {}, exhaustive argmin frame {}", s,
                               chosen.frame.value, candidates[best].frame.value);
        });
        rec.check(pool.size() == 0,
                  [&] { return fmt::format("pool {}: {} entries left after selection", s, pool.size()); });
    }

    const MemoryPolicy policies[] = {MemoryPolicy::Vanilla, MemoryPolicy::Extended,
                                     MemoryPolicy::Interval, MemoryPolicy::DLM};
    std::size_t steps = 0;
    for (int s = 0; steps < 10000; ++s) {
        TrackerConfig cfg;
        cfg.policy = policies[s % 4];
        cfg.n_p = static_cast<int>(rng.uniform_int(1, 6));
        cfg.n_l = static_cast<int>(rng.uniform_int(1, 6));
        cfg.short_term_capacity = static_cast<int>(rng.uniform_int(1, 8));
        cfg.gamma_iou = rng.uniform(0.5, 0.99);
        ScoreReport init;
        init.frame = FrameIndex{rng.uniform_int(0, 5)};
        init.iou_score = 0.9;
        init.embedding = random_embedding(rng, 4, {});
        memory::MemoryBank bank(init, cfg);
        const auto short_cap = static_cast<std::size_t>(cfg.effective_short_term_capacity());
        const std::size_t long_cap =
            cfg.policy == MemoryPolicy::DLM        ? static_cast<std::size_t>(cfg.n_l - 1)
            : cfg.policy == MemoryPolicy::Interval ? static_cast<std::size_t>(cfg.interval_keep)
                                                   : 0;
        std::int64_t frame = init.frame.value;
        const auto len = rng.uniform_int(1, 300);
        for (std::int64_t i = 0; i < len; ++i, ++steps) {
            ScoreReport r;
            frame += rng.uniform_int(1, 2);
            r.frame = FrameIndex{frame};
            r.iou_score = rng.uniform();
            r.embedding = random_embedding(rng, 4, {});
            const auto pool_before = bank.pool().size();
            bank.update(r);
            const auto ctx = bank.assemble_context();
            const bool has_initial =
                !ctx.empty() && ctx.front().kind == memory::EntryKind::Initial &&
                ctx.front().frame == init.frame;
            rec.check(has_initial, [&] {
                return fmt::format("{} run {}: initial entry missing at frame {}",
                                   to_string(cfg.policy), s, frame);
            });
            rec.check(bank.short_term().size() <= short_cap &&
                          bank.long_term().queue().size() <= long_cap &&
                          bank.pool().size() < static_cast<std::size_t>(cfg.n_p),
                      [&] {
                          return fmt::format("{} run {}: capacity exceeded at frame {}",
                                             to_string(cfg.policy), s, frame);
                      });
            if (cfg.policy == MemoryPolicy::DLM && r.iou_score > cfg.gamma_iou &&
                pool_before + 1 == static_cast<std::size_t>(cfg.n_p)) {
                rec.check(bank.pool().size() == 0, [&] {
                    return fmt::format("dlm run {}: pool not cleared after selection", s);
                });
            }
        }
    }
    return rec.take();
}

// ---------------------------------------------------------------------------
// scan

void randomize(std::vector<kernels::TensorView> views, Rng& rng, double scale) {
    for (auto& v : views) {
        for (auto& x : v.data) {
            x = rng.uniform(-scale, scale);
        }
    }
}

/// y_t = sum_{s<=t} C_t . (prod_{k=s+1..t} exp(delta_k A)) delta_s B_s x_s, expanded.
kernels::Matrix unrolled_scan(const kernels::Matrix& x, const kernels::ScanParams& p) {
    const auto len = x.rows();
    const auto dim = x.cols();
    const auto state = p.state_dim();
    auto delta = [&](Eigen::Index t, Eigen::Index d) {
        double z = p.b_delta(d);
        for (Eigen::Index j = 0; j < dim; ++j) {
            z += x(t, j) * p.w_delta(j, d);
        }
        return std::log1p(std::exp(z));
    };
    auto proj = [&](const kernels::Matrix& w, const kernels::Vector& b, Eigen::Index t,
                    Eigen::Index n) {
        double v = b(n);
        for (Eigen::Index j = 0; j < dim; ++j) {
            v += x(t, j) * w(j, n);
        }
        return v;
    };
    kernels::Matrix y = kernels::Matrix::Zero(len, dim);
    for (Eigen::Index t = 0; t < len; ++t) {
        for (Eigen::Index d = 0; d < dim; ++d) {
            double acc = 0.0;
            for (Eigen::Index n = 0; n < state; ++n) {
                const double a = -std::exp(p.a_log(d, n));
                double h = 0.0;
                for (Eigen::Index s = 0; s <= t; ++s) {
                    double decay = 1.0;
                    for (Eigen::Index k = s + 1; k <= t; ++k) {
                        decay *= std::exp(delta(k, d) * a);
                    }
                    h += decay * delta(s, d) * proj(p.w_b, p.b_b, s, n) * x(s, d);
                }
                acc += proj(p.w_c, p.b_c, t, n) * h;
            }
            y(t, d) = acc;
        }
    }
    return y;
}

SuiteResult scan_suite(std::uint64_t seed) {
    Recorder rec("scan");
    Rng rng(mix_seed(seed, 0x5ca7));
    for (int s = 0; s < 200; ++s) {
        const auto len = rng.uniform_int(1, 16);
        const auto dim = static_cast<int>(rng.uniform_int(1, 4));
        const auto state = static_cast<int>(rng.uniform_int(1, 8));
        auto p = kernels::ScanParams::zeros(dim, state);
        randomize(p.tensors(), rng, 0.8);
        kernels::Matrix x(len, dim);
        for (auto& v : x.reshaped()) {
            v = rng.uniform(-1.0, 1.0);
        }
        const auto y = kernels::selective_scan(x, p);
        const auto ref = unrolled_scan(x, p);
        const double err = (y - ref).cwiseAbs().maxCoeff();
        rec.check(err <= 1e-10, [&] {
            return fmt::format("case {} (L={}, D={}, N={}): streaming vs unrolled max error {:.3e}",
                               s, len, dim, state, err);
        });

        const auto k = rng.uniform_int(0, len - 1);
        auto x2 = x;
        for (Eigen::Index d = 0; d < dim; ++d) {
            x2(k, d) += rng.uniform(0.5, 1.5);
        }
        const auto y2 = kernels::selective_scan(x2, p);
        const bool causal = k == 0 || y.topRows(k) == y2.topRows(k);
        rec.check(causal, [&] {
            return fmt::format("case {}: perturbing token {} changed earlier outputs", s, k);
        });
    }
    return rec.take();
}

// ---------------------------------------------------------------------------
// metrics

MaskGrid grid(int h, int w, std::initializer_list<int> on) {
    MaskGrid m(h, w);
    for (const int i : on) {
        m.set(i / w, i % w, true);
    }
    return m;
}

/// Augmenting-path matching over the dense distance table.
std::size_t simple_matching(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                            int width, double tol) {
    const auto w = static_cast<std::size_t>(width);
    std::vector<std::vector<bool>> near(a.size(), std::vector<bool>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double dr = static_cast<double>(a[i] / w) - static_cast<double>(b[j] / w);
            const double dc = static_cast<double>(a[i] % w) - static_cast<double>(b[j] % w);
            near[i][j] = std::sqrt(dr * dr + dc * dc) <= tol;
        }
    }
    std::vector<int> owner(b.size(), -1);
    std::function<bool(std::size_t, std::vector<bool>&)> augment = [&](std::size_t i,
                                                                       std::vector<bool>& seen) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (near[i][j] && !seen[j]) {
                seen[j] = true;
                if (owner[j] < 0 || augment(static_cast<std::size_t>(owner[j]), seen)) {
                    owner[j] = static_cast<int>(i);
                    return true;
                }
            }
        }
        return false;
    };
    std::size_t matched = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::vector<bool> seen(b.size(), false);
        matched += augment(i, seen) ? 1 : 0;
    }
    return matched;
}

SuiteResult metrics_suite(std::uint64_t seed) {
    Recorder rec("metrics");
    struct JCase {
        MaskGrid pred, gt;
        double expected;
    };
    // Hand-counted intersections over unions.
    const JCase cases[] = {
        {grid(4, 4, {0, 1, 4, 5}), grid(4, 4, {0, 1, 4, 5}), 1.0},
        {grid(4, 4, {0, 1}), grid(4, 4, {14, 15}), 0.0},
        {grid(4, 4, {0, 1, 2, 3}), grid(4, 4, {2, 3, 6, 7}), 2.0 / 6.0},
        {grid(4, 4, {}), grid(4, 4, {}), 1.0},
        {grid(4, 4, {}), grid(4, 4, {5}), 0.0},
        {grid(4, 4, {5}), grid(4, 4, {}), 0.0},
        {grid(3, 3, {0, 1, 2, 3, 4, 5, 6, 7, 8}), grid(3, 3, {4}), 1.0 / 9.0},
        {grid(2, 5, {0, 1, 2}), grid(2, 5, {1, 2, 3}), 2.0 / 4.0},
        {grid(3, 3, {0, 4, 8}), grid(3, 3, {2, 4, 6}), 1.0 / 5.0},
        {grid(1, 8, {0, 1, 2, 3, 4, 5}), grid(1, 8, {2, 3, 4, 5, 6, 7}), 4.0 / 8.0},
    };
    for (std::size_t i = 0; i < std::size(cases); ++i) {
        const double j = sim::frame_j(cases[i].pred, cases[i].gt);
        rec.check(j == cases[i].expected, [&] {
            return fmt::format("J case {}: got {}, expected {}", i, j, cases[i].expected);
        });
    }

    Rng rng(mix_seed(seed, 0xf0));
    for (int s = 0; s < 500; ++s) {
        const int h = static_cast<int>(rng.uniform_int(1, 16));
        const int w = static_cast<int>(rng.uniform_int(1, 16));
        const double fill_a = rng.uniform(0.1, 0.9);
        const double fill_b = rng.uniform(0.1, 0.9);
        const double tol = s % 3 == 0 ? 1.0 : rng.uniform(0.0, 3.0);
        MaskGrid a(h, w);
        MaskGrid b(h, w);
        for (int r = 0; r < h; ++r) {
            for (int c = 0; c < w; ++c) {
                a.set(r, c, rng.uniform() < fill_a);
                b.set(r, c, rng.uniform() < fill_b);
            }
        }
        const auto ba = sim::boundary_pixels(a);
        const auto bb = sim::boundary_pixels(b);
        const auto got = sim::match_boundaries(ba, bb, w, tol);
        const auto want = simple_matching(ba, bb, w, tol);
        rec.check(got == want, [&] {
            return fmt::format("F pair {} ({}x{}, tol {:.3f}): matcher {} vs reference {}", s, h,
                               w, tol, got, want);
        });
    }

    for (int s = 0; s < 100; ++s) {
        const int dim = 4 * static_cast<int>(rng.uniform_int(1, 3));
        const int heads = static_cast<int>(rng.uniform_int(1, 2)) * 2;
        auto p = kernels::AttentionParams::zeros(dim, heads);
        randomize(p.tensors(), rng, 1.5);
        kernels::Matrix q(rng.uniform_int(1, 6), dim);
        kernels::Matrix ctx(rng.uniform_int(1, 9), dim);
        for (auto& v : q.reshaped()) v = rng.uniform(-2.0, 2.0);
        for (auto& v : ctx.reshaped()) v = rng.uniform(-2.0, 2.0);
        const auto out = kernels::cross_attention(q, ctx, p);
        double worst = 0.0;
        for (const auto& wts : out.weights) {
            worst = std::max(worst, (wts.rowwise().sum().array() - 1.0).abs().maxCoeff());
        }
        rec.check(worst <= 1e-12, [&] {
            return fmt::format("attention case {}: softmax rows off by {:.3e}", s, worst);
        });
    }
    return rec.take();
}

// ---------------------------------------------------------------------------
// gradients

SuiteResult gradients_suite(std::uint64_t seed) {
    Recorder rec("gradients");
    for (const auto& op : kernels::grad_check_ops()) {
        for (std::uint64_t s = 0; s < 5; ++s) {
            const auto r = kernels::grad_check(op, seed + s, 1e-5);
            rec.check(r.max_rel_error < 1e-5, [&] {
                return fmt::format("{} seed {}: max relative error {:.3e} at {}", op, seed + s,
                                   r.max_rel_error, r.worst_variable);
            });
        }
    }
    return rec.take();
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"gate", "memory", "scan", "metrics", "gradients"};
    return names;
}

fault::Fault parse_mutation(const std::string& name) {
    if (name == "gate-window") return fault::Fault::GateWindowOffByOne;
    if (name == "diversity-argmax") return fault::Fault::DiversityArgmax;
    if (name == "scan-decay") return fault::Fault::ScanSkipsDecay;
    throw ConfigError(fmt::format(
        "unknown mutation '{}' (expected gate-window, diversity-argmax or scan-decay)", name));
}

std::vector<SuiteResult> run_verify(const VerifyOptions& options) {
    for (const auto& s : options.suites) {
        if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end()) {
            throw ConfigError(fmt::format("unknown suite '{}'", s));
        }
    }
    auto selected = [&](const std::string& name) {
        return options.suites.empty() ||
               std::find(options.suites.begin(), options.suites.end(), name) !=
                   options.suites.end();
    };
    std::optional<fault::ScopedFault> guard;
    if (options.mutate != fault::Fault::None) {
        guard.emplace(options.mutate);
    }
    const std::pair<std::string, std::function<SuiteResult(std::uint64_t)>> suites[] = {
        {"gate", gate_suite},       {"memory", memory_suite},      {"scan", scan_suite},
        {"metrics", metrics_suite}, {"gradients", gradients_suite},
    };
    std::vector<SuiteResult> out;
    for (const auto& [name, fn] : suites) {
        if (selected(name)) {
            out.push_back(fn(options.seed));
        }
    }
    return out;
}

}  // namespace cltrack::verify

// One line per acceptance criterion; exit status is non-zero if any fails.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "cltrack/cli/app.hpp"
#include "cltrack/core/random.hpp"
#include "cltrack/gate/gate.hpp"
#include "cltrack/kernels/grad_check.hpp"
#include "cltrack/kernels/layers.hpp"
#include "cltrack/kernels/scan.hpp"
#include "cltrack/memory/memory_bank.hpp"
#include "cltrack/sim/compare.hpp"
#include "cltrack/sim/metrics.hpp"
#include "cltrack/tracker/replay_backend.hpp"
#include "cltrack/tracker/run.hpp"
#include "cltrack/verify/verify.hpp"
#include "support/oracles.hpp"

using namespace cltrack;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances.
constexpr double kGateSeconds = 10.0;
constexpr double kCompareSeconds = 120.0;
constexpr double kVerifySeconds = 300.0;
constexpr double kScanTolerance = 1e-10;
constexpr double kGradTolerance = 1e-5;
constexpr double kAttentionTolerance = 1e-12;
constexpr double kScanScaling = 2.5;
constexpr double kOverheadRatio = 2.0;
constexpr std::int64_t kCoverageFrames = 15;

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(Clock::time_point t) {
    return std::chrono::duration<double>(Clock::now() - t).count();
}

Outcome gate_equivalence() {
    const auto start = Clock::now();
    Rng rng(1001);
    std::size_t mismatches = 0, fired = 0;
    constexpr int kStreams = 2000;
    for (int s = 0; s < kStreams; ++s) {
        TrackerConfig cfg;
        cfg.delta_iou = rng.uniform(0.05, 0.95);
        cfg.delta_o = rng.uniform(0.05, 0.95);
        cfg.n_w = static_cast<int>(rng.uniform_int(1, 8));
        const auto len = rng.uniform_int(0, 200);
        const double p_good = rng.uniform(0.5, 1.0);
        std::vector<oracle::Score> scores;
        std::int64_t frame = rng.uniform_int(0, 3);
        for (std::int64_t i = 0; i < len; ++i) {
            frame += rng.uniform_int(1, 2);
            const bool good = rng.uniform() < p_good;
            const double iou = good ? rng.uniform(cfg.delta_iou, 1.0) : rng.uniform();
            const double occ = good ? rng.uniform(2.5, 6.0) : rng.uniform(-6.0, 6.0);
            scores.push_back({frame, std::round(iou * 50) / 50, occ});
        }
        const auto expected = oracle::window_gate(scores, cfg.delta_iou, cfg.delta_o, cfg.n_w);
        gate::GateState g;
        oracle::GateDecision got;
        for (const auto& sc : scores) {
            ScoreReport r;
            r.frame = FrameIndex{sc.frame};
            r.iou_score = sc.iou;
            r.occlusion_logit = sc.occ;
            if (const auto sel = g.observe(r, cfg)) {
                got = {sel->frame.value, sel->decided_at.value};
                break;
            }
        }
        mismatches += got == expected ? 0 : 1;
        fired += expected.selected >= 0 ? 1 : 0;
    }
    const double secs = seconds_since(start);
    return {mismatches == 0 && secs < kGateSeconds,
            fmt::format("{} streams ({} selections), {} mismatches, {:.2f} s (limit {} s)", kStreams,
                        fired, mismatches, secs, kGateSeconds)};
}

std::vector<double> random_vec(Rng& rng, std::size_t dim) {
    std::vector<double> v(dim);
    for (auto& x : v) x = std::round(rng.normal() * 3.0);
    if (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; })) v[0] = 1.0;
    return v;
}

Outcome memory_correctness() {
    Rng rng(2002);
    std::size_t argmin_bad = 0, pool_dirty = 0;
    constexpr int kPools = 2000;
    for (int t = 0; t < kPools; ++t) {
        const auto dim = static_cast<std::size_t>(rng.uniform_int(2, 6));
        const int cap = static_cast<int>(rng.uniform_int(1, 8));
        memory::CandidatePool pool(cap);
        std::vector<std::vector<double>> raw;
        for (int i = 0; i < cap; ++i) {
            raw.push_back(random_vec(rng, dim));
            pool.offer({FrameIndex{i}, Embedding(raw.back()), 0.99, memory::EntryKind::ShortTerm}, 0.5);
        }
        const auto latest = random_vec(rng, dim);
        const auto chosen = memory::select_diverse(
            pool, {FrameIndex{-1}, Embedding(latest), 1.0, memory::EntryKind::LongTerm});
        argmin_bad += chosen.frame.value == static_cast<std::int64_t>(oracle::diverse_argmin(raw, latest)) ? 0 : 1;
        pool_dirty += pool.size() == 0 ? 0 : 1;
    }

    std::size_t steps = 0, missing_initial = 0, over_capacity = 0, pushes = 0;
    for (int run = 0; steps < 20000; ++run) {
        TrackerConfig cfg;
        cfg.policy = static_cast<MemoryPolicy>(run % 4);
        cfg.n_p = static_cast<int>(rng.uniform_int(1, 6));
        cfg.n_l = static_cast<int>(rng.uniform_int(1, 6));
        cfg.short_term_capacity = static_cast<int>(rng.uniform_int(1, 8));
        cfg.gamma_iou = rng.uniform(0.3, 0.95);
        ScoreReport init;
        init.frame = FrameIndex{0};
        init.iou_score = 0.9;
        init.embedding = Embedding(random_vec(rng, 3));
        memory::MemoryBank bank(init, cfg);
        const auto short_cap = static_cast<std::size_t>(cfg.effective_short_term_capacity());
        const std::size_t long_cap = cfg.policy == MemoryPolicy::DLM ? static_cast<std::size_t>(cfg.n_l)
                                     : cfg.policy == MemoryPolicy::Interval
                                         ? static_cast<std::size_t>(cfg.interval_keep) + 1
                                         : 1u;
        const auto len = rng.uniform_int(1, 400);
        for (std::int64_t i = 1; i <= len; ++i, ++steps) {
            ScoreReport r;
            r.frame = FrameIndex{i};
            r.iou_score = rng.uniform();
            r.embedding = Embedding(random_vec(rng, 3));
            const auto before = bank.pool().size();
            bank.update(r);
            if (cfg.policy == MemoryPolicy::DLM && before + 1 == static_cast<std::size_t>(cfg.n_p) &&
                r.iou_score > cfg.gamma_iou) {
                ++pushes;
                pool_dirty += bank.pool().size() == 0 ? 0 : 1;
            }
            const auto ctx = bank.assemble_context();
            missing_initial += !ctx.empty() && ctx.front().kind == memory::EntryKind::Initial ? 0 : 1;
            over_capacity += bank.short_term().size() <= short_cap && bank.long_term().size() <= long_cap &&
                                     bank.pool().size() < static_cast<std::size_t>(cfg.n_p)
                                 ? 0
                                 : 1;
        }
    }
    const bool pass = argmin_bad == 0 && pool_dirty == 0 && missing_initial == 0 && over_capacity == 0;
    return {pass, fmt::format("{} pools: {} argmin mismatches; {} update steps ({} DLM selections): "
                              "{} non-empty pools after selection, {} contexts without the initial "
                              "entry, {} capacity violations",
                              kPools, argmin_bad, steps, pushes, pool_dirty, missing_initial, over_capacity)};
}

struct Coverage {
    std::int64_t min_span = 0;
    std::int64_t max_span = 0;
    std::int64_t min_age = 0;
};

Coverage steady_coverage(MemoryPolicy policy) {
    std::vector<StreamRecord> records;
    for (std::int64_t f = 0; f < 500; ++f) {
        StreamRecord r;
        r.report.frame = FrameIndex{f};
        r.report.iou_score = 0.99;
        r.report.occlusion_logit = 6.0;
        r.report.embedding = Embedding{1.0, 0.5, 0.25};
        r.report.mask = MaskGrid(4, 4);
        records.push_back(std::move(r));
    }
    auto backend = std::make_shared<tracker::ReplayBackend>(records);
    TrackerConfig cfg;
    cfg.policy = policy;
    tracker::Tracker t(cfg, backend, Embedding{1.0});
    const auto run = tracker::run_stream(t, backend->payloads());
    Coverage c{std::numeric_limits<std::int64_t>::max(), 0, std::numeric_limits<std::int64_t>::max()};
    for (std::size_t f = 100; f < run.steps.size(); ++f) {
        const auto& snap = *run.steps[f].memory_snapshot;
        c.min_span = std::min(c.min_span, snap.span());
        c.max_span = std::max(c.max_span, snap.span());
        c.min_age = std::min(c.min_age, snap.span() - 1);
    }
    return c;
}

Outcome temporal_coverage() {
    const auto dlm = steady_coverage(MemoryPolicy::DLM);
    const auto vanilla = steady_coverage(MemoryPolicy::Vanilla);
    const bool pass = dlm.min_span == kCoverageFrames && vanilla.max_span == 6 &&
                      dlm.min_span > vanilla.max_span;
    return {pass, fmt::format("steady stream, frames 100..499: DLM min coverage {} frames (expected "
                              "exactly {}; newest minus oldest non-initial frame {}), Vanilla max "
                              "coverage {} frames (expected 6)",
                              dlm.min_span, kCoverageFrames, dlm.min_age, vanilla.max_span)};
}

double mean_jf(const sim::CompareReport& report, const std::string& name) {
    for (const auto& a : report.aggregate)
        if (a.variant == name) return a.jf.mean;
    return std::nan("");
}

Outcome memory_ordering() {
    const auto start = Clock::now();
    const auto script = sim::builtin_scenario("default");
    const std::vector<sim::PolicyVariant> variants{sim::policy_variant(MemoryPolicy::Vanilla),
                                                   sim::policy_variant(MemoryPolicy::Extended),
                                                   sim::policy_variant(MemoryPolicy::Interval),
                                                   sim::policy_variant(MemoryPolicy::DLM)};
    const auto report = sim::compare_policies(script, variants, {20, 0, 1.0});
    const double secs = seconds_since(start);
    const double v = mean_jf(report, "vanilla"), e = mean_jf(report, "extended");
    const double i = mean_jf(report, "interval"), d = mean_jf(report, "dlm");
    return {d > i && i > v && secs < kCompareSeconds && script.length == 500,
            fmt::format("drifting scene, 20 seeds x 500 frames: J&F dlm {:.4f} > interval {:.4f} > "
                        "vanilla {:.4f} (extended {:.4f}), {:.1f} s (limit {} s)",
                        d, i, v, e, secs, kCompareSeconds)};
}

Outcome gate_ablation() {
    const auto script = sim::builtin_scenario("early-low-quality");
    auto credible = sim::policy_variant(MemoryPolicy::DLM);
    credible.name = "credible";
    auto first = credible;
    first.name = "first";
    first.gate_mode = tracker::GateMode::FirstQualifying;
    const std::vector<sim::PolicyVariant> variants{credible, first};
    const auto report = sim::compare_policies(script, variants, {20, 0, 1.0});
    const double c = mean_jf(report, "credible"), f = mean_jf(report, "first");
    return {c >= f, fmt::format("early low-quality detections, 20 seeds: J&F credible gate {:.4f} >= "
                                "first-qualifying gate {:.4f}",
                                c, f)};
}

Outcome kernel_numerics() {
    Rng rng(6006);
    double scan_err = 0.0;
    std::size_t causality_bad = 0;
    for (int t = 0; t < 300; ++t) {
        const int dim = static_cast<int>(rng.uniform_int(1, 6));
        const int state = static_cast<int>(rng.uniform_int(1, 8));
        const auto len = rng.uniform_int(1, 16);
        auto p = kernels::ScanParams::zeros(dim, state);
        for (auto& v : p.tensors())
            for (auto& x : v.data) x = rng.normal() * 0.8;
        kernels::Matrix x(len, dim);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
        const auto y = kernels::selective_scan(x, p);
        const auto ref = oracle::unrolled_scan(x, p.a_log, p.w_delta, p.b_delta, p.w_b, p.b_b, p.w_c, p.b_c);
        scan_err = std::max(scan_err, (y - ref).cwiseAbs().maxCoeff());
        if (len > 1) {
            const auto cut = rng.uniform_int(1, len - 1);
            auto x2 = x;
            for (auto i = cut; i < len; ++i) x2.row(i).setRandom();
            const auto y2 = kernels::selective_scan(x2, p);
            causality_bad += y.topRows(cut) == y2.topRows(cut) ? 0 : 1;
        }
    }

    double grad_err = 0.0;
    std::string worst_op;
    for (const auto& op : kernels::grad_check_ops()) {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const auto r = kernels::grad_check(op, seed, 1e-5);
            if (r.max_rel_error > grad_err) {
                grad_err = r.max_rel_error;
                worst_op = op;
            }
        }
    }

    double attn_err = 0.0;
    for (int t = 0; t < 100; ++t) {
        const int heads = static_cast<int>(rng.uniform_int(1, 4));
        const int dim = heads * static_cast<int>(rng.uniform_int(1, 4));
        auto p = kernels::AttentionParams::zeros(dim, heads);
        for (auto& v : p.tensors())
            for (auto& x : v.data) x = rng.normal() * 1.5;
        kernels::Matrix q(rng.uniform_int(1, 6), dim), k(rng.uniform_int(1, 9), dim);
        for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = rng.normal() * 2;
        for (Eigen::Index i = 0; i < k.size(); ++i) k.data()[i] = rng.normal() * 2;
        for (const auto& w : kernels::cross_attention(q, k, p).weights)
            attn_err = std::max(attn_err, (w.rowwise().sum().array() - 1.0).abs().maxCoeff());
    }

    auto sp = kernels::ScanParams::zeros(16, 8);
    for (auto& v : sp.tensors())
        for (auto& x : v.data) x = rng.normal() * 0.3;
    auto tokens = [&](Eigen::Index len) {
        kernels::Matrix x(len, 16);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
        return x;
    };
    const auto x_short = tokens(2048), x_long = tokens(4096);
    auto time_once = [&](const kernels::Matrix& x) {
        const auto s = Clock::now();
        const double check = kernels::selective_scan(x, sp)(x.rows() - 1, 0);
        return std::isfinite(check) ? seconds_since(s) : 1e30;
    };
    // Interleaved so both lengths see the same machine conditions.
    double t_short = 1e30, t_long = 1e30;
    for (int r = 0; r < 21; ++r) {
        t_short = std::min(t_short, time_once(x_short));
        t_long = std::min(t_long, time_once(x_long));
    }
    const double ratio = t_long / t_short;

    const bool pass = scan_err <= kScanTolerance && causality_bad == 0 && grad_err < kGradTolerance &&
                      attn_err <= kAttentionTolerance && ratio <= kScanScaling;
    return {pass, fmt::format("scan vs unrolled max err {:.2e} (<= {:.0e}), {} causality violations, "
                              "max grad rel err {:.2e} ({}) over 50 seeds/op (< {:.0e}), attention "
                              "row-sum err {:.2e} (<= {:.0e}), scan 2048->4096 time ratio {:.2f} (<= {})",
                              scan_err, kScanTolerance, causality_bad, grad_err, worst_op,
                              kGradTolerance, attn_err, kAttentionTolerance, ratio, kScanScaling)};
}

MaskGrid mask_from(const std::vector<std::string>& rows) {
    MaskGrid m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int r = 0; r < m.height(); ++r)
        for (int c = 0; c < m.width(); ++c) m.set(r, c, rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] == '#');
    return m;
}

Outcome metrics_exactness() {
    struct Case {
        std::vector<std::string> pred, gt;
        double j;
    };
    // Hand-counted intersection / union.
    const std::vector<Case> cases{
        {{"##..", "##..", "....", "...."}, {"##..", "##..", "....", "...."}, 1.0},
        {{"##..", "##..", "....", "...."}, {"....", "....", "..##", "..##"}, 0.0},
        {{"####", "....", "....", "...."}, {"..##", "..##", "....", "...."}, 1.0 / 3.0},
        {{"....", "....", "....", "...."}, {"....", "....", "....", "...."}, 1.0},
        {{"....", "....", "....", "...."}, {"#...", "....", "....", "...."}, 0.0},
        {{"###.", "###.", "###.", "...."}, {"##..", "##..", "....", "...."}, 4.0 / 9.0},
        {{"####", "####", "####", "####"}, {"#...", "....", "....", "...."}, 1.0 / 16.0},
        {{"#.#.", ".#.#", "#.#.", ".#.#"}, {"####", "####", "....", "...."}, 4.0 / 12.0},
        {{"##...", "##...", "....."}, {".##..", ".##..", "....."}, 2.0 / 6.0},
        {{"###", "###", "###"}, {"...", ".#.", "..."}, 1.0 / 9.0},
        {{"#..", ".#.", "..#"}, {"#..", ".#.", "##."}, 2.0 / 5.0},
        {{"##", "##"}, {"#.", ".#"}, 2.0 / 4.0},
    };
    std::size_t j_bad = 0;
    for (const auto& c : cases) j_bad += sim::frame_j(mask_from(c.pred), mask_from(c.gt)) == c.j ? 0 : 1;

    Rng rng(7007);
    std::size_t f_bad = 0, exhaustive_checked = 0;
    constexpr int kPairs = 500;
    for (int t = 0; t < kPairs; ++t) {
        const int n = static_cast<int>(rng.uniform_int(2, 16));
        auto blob = [&] {
            MaskGrid m(n, n);
            const int r0 = static_cast<int>(rng.uniform_int(0, n - 1)), c0 = static_cast<int>(rng.uniform_int(0, n - 1));
            const int r1 = static_cast<int>(rng.uniform_int(r0, n - 1)), c1 = static_cast<int>(rng.uniform_int(c0, n - 1));
            const double density = rng.uniform(0.4, 1.0);
            for (int r = r0; r <= r1; ++r)
                for (int c = c0; c <= c1; ++c) m.set(r, c, rng.uniform() < density);
            return m;
        };
        const auto p = blob(), g = blob();
        const double tol = t % 2 ? 1.0 : 1.5;
        const auto bp = sim::boundary_pixels(p), bg = sim::boundary_pixels(g);
        std::vector<oracle::Pixel> pp, pg;
        for (auto i : bp) pp.push_back({static_cast<int>(i) / n, static_cast<int>(i) % n});
        for (auto i : bg) pg.push_back({static_cast<int>(i) / n, static_cast<int>(i) % n});
        const auto got = sim::match_boundaries(bp, bg, n, tol);
        const auto want = pp.size() <= 10 && pg.size() <= 10 ? oracle::exhaustive_matching(pp, pg, tol)
                                                              : oracle::max_flow_matching(pp, pg, tol);
        exhaustive_checked += pp.size() <= 10 && pg.size() <= 10 ? 1 : 0;
        f_bad += got == want ? 0 : 1;
    }
    return {j_bad == 0 && f_bad == 0,
            fmt::format("{} hand-counted J pairs, {} inexact; {} random F pairs up to 16x16, {} "
                        "matcher mismatches ({} against exhaustive assignment search, rest "
                        "against augmenting-path max flow)",
                        cases.size(), j_bad, kPairs, f_bad, exhaustive_checked)};
}

Outcome performance() {
    std::vector<StreamRecord> records;
    Rng rng(8008);
    constexpr std::int64_t kFrames = 10000;
    for (std::int64_t f = 0; f < kFrames; ++f) {
        StreamRecord r;
        r.report.frame = FrameIndex{f};
        r.report.iou_score = rng.uniform(0.9, 1.0);
        r.report.occlusion_logit = 6.0;
        r.report.embedding = Embedding(random_vec(rng, 16));
        r.report.mask = MaskGrid(8, 8);
        records.push_back(std::move(r));
    }
    auto backend = std::make_shared<tracker::ReplayBackend>(records);
    const auto payloads = backend->payloads();
    auto window_mean = [](const std::vector<double>& v, std::int64_t centre) {
        const auto end = std::min<std::int64_t>(centre + 100, static_cast<std::int64_t>(v.size()));
        const auto begin = end - 200;
        double s = 0;
        for (auto i = begin; i < end; ++i) s += v[static_cast<std::size_t>(i)];
        return s / 200.0;
    };
    bool ok = true;
    std::string detail;
    for (auto policy : {MemoryPolicy::Vanilla, MemoryPolicy::Extended, MemoryPolicy::Interval, MemoryPolicy::DLM}) {
        std::vector<double> early, late;
        for (int rep = 0; rep < 5; ++rep) {
            TrackerConfig cfg;
            cfg.policy = policy;
            tracker::Tracker t(cfg, backend, Embedding{1.0});
            std::vector<double> ns;
            ns.reserve(payloads.size());
            for (const auto& p : payloads) ns.push_back(static_cast<double>(t.step(p).policy_time_ns));
            early.push_back(window_mean(ns, 100));
            late.push_back(window_mean(ns, kFrames));
        }
        std::sort(early.begin(), early.end());
        std::sort(late.begin(), late.end());
        const double ratio = late[2] / early[2];
        ok = ok && ratio < kOverheadRatio;
        detail += fmt::format("{} {:.2f}, ", to_string(policy), ratio);
    }

    const auto start = Clock::now();
    const auto suites = verify::run_verify({});
    const double secs = seconds_since(start);
    const bool verified = std::all_of(suites.begin(), suites.end(), [](const auto& s) { return s.passed(); });
    return {ok && verified && secs < kVerifySeconds,
            fmt::format("overhead ratio frame 10000 / frame 100: {}(limit {}); full verify {} in {:.2f} s "
                        "(limit {} s)",
                        detail, kOverheadRatio, verified ? "passed" : "FAILED", secs, kVerifySeconds)};
}

Outcome determinism() {
    const auto root = std::filesystem::temp_directory_path() / ("cltrack-acceptance-" + std::to_string(::getpid()));
    std::filesystem::remove_all(root);
    std::filesystem::create_directories(root);
    const std::vector<std::vector<std::string>> commands{
        {"--seed", "3", "simulate", "--scenario", "occlusion", "--policy", "dlm"},
        {"compare", "--scenario", "default", "--seeds", "3"},
        {"gradcheck", "--seeds", "5"},
        {"verify"},
    };
    std::string detail;
    bool ok = true;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        const auto first = (root / fmt::format("run{}", i)).string();
        const auto again = (root / fmt::format("replay{}", i)).string();
        std::vector<std::string> args{"--out", first};
        args.insert(args.end(), commands[i].begin(), commands[i].end());
        std::ostringstream sink;
        const int rc = cli::run(args, sink, sink);
        const int replay = cli::run({"--out", again, "replay", first + "/manifest.json"}, sink, sink);
        const bool same = rc == 0 && replay == 0;
        ok = ok && same;
        detail += fmt::format("{} {}, ", commands[i][0] == "--seed" ? "simulate" : commands[i][0],
                              same ? "identical" : fmt::format("rc {} replay {}", rc, replay));
    }
    std::filesystem::remove_all(root);
    detail.resize(detail.size() - 2);
    return {ok, "manifest replays: " + detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"gate oracle equivalence", gate_equivalence},
        {"diversity memory correctness", memory_correctness},
        {"temporal coverage", temporal_coverage},
        {"memory policy ordering", memory_ordering},
        {"initial frame selection ablation", gate_ablation},
        {"kernel numerics", kernel_numerics},
        {"metrics", metrics_exactness},
        {"performance contract", performance},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << fmt::format("[{}] criterion {} {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1,
                                 criteria[i].first, o.detail)
                  << std::flush;
    }
    std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed),
                             criteria.size());
    return failed == 0 ? 0 : 1;
}

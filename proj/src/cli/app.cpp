#include "cltrack/cli/app.hpp"

#include <sys/utsname.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "cltrack/cli/manifest.hpp"
#include "cltrack/core/error.hpp"
#include "cltrack/core/random.hpp"
#include "cltrack/core/stream_io.hpp"
#include "cltrack/kernels/grad_check.hpp"
#include "cltrack/kernels/scan.hpp"
#include "cltrack/kernels/toy_backend.hpp"
#include "cltrack/sim/compare.hpp"
#include "cltrack/sim/scene_config.hpp"
#include "cltrack/tracker/replay_backend.hpp"
#include "cltrack/verify/verify.hpp"

namespace cltrack::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

struct Globals {
    std::string out;
    std::uint64_t seed = 0;
    std::string config;
};

struct Context {
    Globals globals;
    std::vector<std::string> replay_args;
    std::ostream& out;
    std::ostream& err;
};

std::vector<std::string> split_list(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (const auto& item : items) {
        std::stringstream ss(item);
        std::string part;
        while (std::getline(ss, part, ',')) {
            if (!part.empty()) {
                out.push_back(part);
            }
        }
    }
    return out;
}

fs::path out_dir(const Globals& g) {
    if (!g.out.empty()) {
        return g.out;
    }
    if (const char* env = std::getenv(kOutEnv); env != nullptr && *env != '\0') {
        return env;
    }
    return "cltrack-out";
}

std::vector<std::string> without_out(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--out") {
            ++i;
            continue;
        }
        if (args[i].rfind("--out=", 0) == 0) {
            continue;
        }
        out.push_back(args[i]);
    }
    return out;
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, std::size_t n) {
    std::vector<std::uint64_t> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = base + i;
    }
    return s;
}

sim::SimulationConfig resolve_config(const Globals& g, const std::string& scenario) {
    return g.config.empty() ? sim::scenario_config(scenario)
                            : sim::load_simulation_config(g.config);
}

tracker::GateMode parse_gate(const std::string& name) {
    if (name == "credible") return tracker::GateMode::Credible;
    if (name == "first") return tracker::GateMode::FirstQualifying;
    throw ConfigError(fmt::format("unknown gate '{}' (expected credible or first)", name));
}

std::string_view gate_name(tracker::GateMode m) {
    return m == tracker::GateMode::Credible ? "credible" : "first";
}

void finish_manifest(const Context& ctx, RunManifest m, const fs::path& dir) {
    m.args = ctx.replay_args;
    m.out_dir = dir.string();
    if (!ctx.globals.config.empty()) {
        m.config_path = ctx.globals.config;
    }
    write_output(dir, std::string(kManifestFile), m.to_json());
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
    std::vector<std::string> suites;
    std::string mutate;
};

int cmd_verify(const Context& ctx, const VerifyArgs& a) {
    verify::VerifyOptions opt;
    opt.suites = split_list(a.suites);
    opt.seed = ctx.globals.seed;
    if (!a.mutate.empty()) {
        opt.mutate = verify::parse_mutation(a.mutate);
    }
    const auto start = Clock::now();
    const auto results = verify::run_verify(opt);
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();

    bool ok = true;
    json suites = json::array();
    for (const auto& r : results) {
        ok = ok && r.passed();
        ctx.out << fmt::format("{} {} ({} cases, {} failed)\n", r.passed() ? "PASS" : "FAIL",
                               r.name, r.cases, r.failed);
        for (const auto& f : r.failures) {
            ctx.out << "    " << f << "\n";
        }
        suites.push_back({{"suite", r.name},
                          {"passed", r.passed()},
                          {"cases", r.cases},
                          {"failed", r.failed},
                          {"failures", r.failures}});
    }
    ctx.out << fmt::format("{} in {:.1f} s\n", ok ? "all suites passed" : "verification failed",
                           secs);

    const auto dir = out_dir(ctx.globals);
    RunManifest m;
    m.command = "verify";
    m.seeds = {opt.seed};
    m.config_hash = fnv1a_hex("");
    json doc{{"mutation", a.mutate.empty() ? json(nullptr) : json(a.mutate)},
             {"passed", ok},
             {"suites", suites}};
    m.outputs.push_back(write_output(dir, "verify.json", doc.dump(2) + "\n"));
    finish_manifest(ctx, std::move(m), dir);
    return ok ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string scenario = "default";
    std::string policy;
    std::string gate = "credible";
    std::string stream;
    double tolerance = sim::kDefaultBoundaryTolerance;
    bool timing = false;
};

std::string summary_csv(std::string_view policy, std::string_view gate, std::uint64_t seed,
                        const tracker::RunSummary& s, const std::optional<sim::Evaluation>& e,
                        bool timing) {
    auto opt = [](const auto& v) { return v ? fmt::format("{}", v->value) : std::string(); };
    std::string csv =
        "policy,gate,seed,frames,tracking_frames,selected_frame,decided_at,j,f,jf,mean_span,"
        "max_span,mean_context_size,mean_policy_time_ns\n";
    csv += fmt::format("{},{},{},{},{},{},{},", policy, gate, seed, s.frames, s.tracking_frames,
                       opt(s.selected_frame), opt(s.decided_at));
    csv += e ? fmt::format("{:.6f},{:.6f},{:.6f},", e->j, e->f, e->jf) : std::string(",,,");
    csv += fmt::format("{:.3f},{},{:.3f},", s.mean_span, s.max_span, s.mean_context_size);
    if (timing) {
        csv += fmt::format("{:.1f}", s.mean_policy_time_ns);
    }
    csv += "\n";
    return csv;
}

void write_run_outputs(RunManifest& m, const fs::path& dir,
                       std::span<const tracker::StepOutput> steps, bool timing) {
    tracker::ExportOptions opt{timing};
    std::ostringstream jsonl;
    tracker::write_run_jsonl(jsonl, steps, opt);
    std::ostringstream csv;
    tracker::write_run_csv(csv, steps, opt);
    m.outputs.push_back(write_output(dir, "run.jsonl", jsonl.str(), !timing));
    m.outputs.push_back(write_output(dir, "run.csv", csv.str(), !timing));
}

int cmd_simulate(const Context& ctx, const SimulateArgs& a) {
    const auto dir = out_dir(ctx.globals);
    RunManifest m;
    m.command = "simulate";
    m.seeds = {ctx.globals.seed};
    const auto gate = parse_gate(a.gate);

    if (!a.stream.empty()) {
        std::ifstream in(a.stream, std::ios::binary);
        if (!in) {
            throw ConfigError(fmt::format("cannot open stream '{}'", a.stream));
        }
        TrackerConfig cfg;
        if (!ctx.globals.config.empty()) {
            cfg = sim::load_simulation_config(ctx.globals.config).tracker;
        }
        if (!a.policy.empty()) {
            cfg.policy = parse_policy(a.policy);
        }
        cfg.validate();
        auto records = read_stream(in);
        const bool has_gt = !records.empty() && std::all_of(records.begin(), records.end(), [](const auto& r) {
            return r.ground_truth.has_value();
        });
        std::vector<MaskGrid> truth;
        for (const auto& r : records) {
            if (r.ground_truth) {
                truth.push_back(*r.ground_truth);
            }
        }
        auto backend = std::make_shared<const tracker::ReplayBackend>(std::move(records));
        const auto payloads = backend->payloads();
        tracker::Tracker tr(cfg, backend, Embedding{1.0}, gate);
        const auto record = tracker::run_stream(tr, payloads);
        std::optional<sim::Evaluation> eval;
        if (has_gt) {
            std::vector<MaskGrid> pred;
            for (const auto& s : record.steps) {
                pred.push_back(s.report.mask);
            }
            sim::Evaluation e;
            e.j = sim::evaluate_j(pred, truth);
            e.f = sim::evaluate_f(pred, truth, a.tolerance);
            e.jf = sim::jf_mean(e.j, e.f);
            eval = e;
        }
        m.config_hash = fnv1a_hex(read_file(a.stream));
        write_run_outputs(m, dir, record.steps, a.timing);
        m.outputs.push_back(write_output(
            dir, "summary.csv",
            summary_csv(to_string(cfg.policy), gate_name(gate), ctx.globals.seed, record.summary,
                        eval, a.timing),
            !a.timing));
        finish_manifest(ctx, std::move(m), dir);
        ctx.out << fmt::format("replayed {} frames from {}\n", record.summary.frames, a.stream);
        return kExitOk;
    }

    auto cfg = resolve_config(ctx.globals, a.scenario);
    if (!a.policy.empty()) {
        cfg.tracker.policy = parse_policy(a.policy);
    }
    cfg.tracker.validate();
    const auto canonical = sim::to_json(cfg);
    m.config_hash = fnv1a_hex(canonical);
    sim::PolicyVariant v{std::string(to_string(cfg.tracker.policy)), cfg.tracker, gate};
    const auto result = sim::simulate(cfg.script, v, ctx.globals.seed, a.tolerance);

    m.outputs.push_back(write_output(dir, "config.json", canonical));
    write_run_outputs(m, dir, result.record.steps, a.timing);
    m.outputs.push_back(write_output(
        dir, "summary.csv",
        summary_csv(v.name, gate_name(gate), ctx.globals.seed, result.record.summary,
                    result.metrics, a.timing),
        !a.timing));
    finish_manifest(ctx, std::move(m), dir);
    ctx.out << fmt::format("{} seed {}: J {:.4f}  F {:.4f}  J&F {:.4f}  mean span {:.2f}\n",
                           v.name, ctx.globals.seed, result.metrics.j, result.metrics.f,
                           result.metrics.jf, result.record.summary.mean_span);
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct CompareArgs {
    std::string scenario = "default";
    std::vector<std::string> policies{"vanilla,extended,interval,dlm"};
    std::vector<std::string> gates{"credible"};
    std::size_t seeds = 20;
    double tolerance = sim::kDefaultBoundaryTolerance;
    bool timing = false;
};

int cmd_compare(const Context& ctx, const CompareArgs& a) {
    const auto cfg = resolve_config(ctx.globals, a.scenario);
    const auto policies = split_list(a.policies);
    const auto gates = split_list(a.gates);
    if (gates.empty()) {
        throw ConfigError("compare: at least one gate is required");
    }
    std::vector<sim::PolicyVariant> variants;
    for (const auto& g : gates) {
        const auto mode = parse_gate(g);
        for (const auto& p : policies) {
            auto v = sim::policy_variant(parse_policy(p), cfg.tracker);
            v.gate_mode = mode;
            if (gates.size() > 1) {
                v.name += "/" + g;
            }
            variants.push_back(std::move(v));
        }
    }
    if (variants.size() < 2) {
        throw ConfigError("compare: at least two variants are required");
    }
    if (a.seeds == 0) {
        throw ConfigError("compare: --seeds must be positive");
    }
    sim::CompareOptions opt;
    opt.seeds = a.seeds;
    opt.base_seed = ctx.globals.seed;
    opt.tolerance = a.tolerance;
    const auto report = sim::compare_policies(cfg.script, variants, opt);

    const auto dir = out_dir(ctx.globals);
    RunManifest m;
    m.command = "compare";
    m.seeds = seed_range(opt.base_seed, opt.seeds);
    const auto canonical = sim::to_json(cfg);
    m.config_hash = fnv1a_hex(canonical);
    const sim::ReportOptions ro{a.timing};
    std::ostringstream rows;
    sim::write_compare_csv(rows, report, ro);
    std::ostringstream agg;
    sim::write_aggregate_csv(agg, report, ro);
    m.outputs.push_back(write_output(dir, "config.json", canonical));
    m.outputs.push_back(write_output(dir, "compare.csv", rows.str(), !a.timing));
    m.outputs.push_back(write_output(dir, "aggregate.csv", agg.str(), !a.timing));
    m.outputs.push_back(write_output(dir, "aggregate.json", sim::aggregate_json(report, ro), !a.timing));
    finish_manifest(ctx, std::move(m), dir);

    ctx.out << fmt::format("{:<20} {:>8} {:>8} {:>8} {:>8}\n", "variant", "J", "F", "J&F", "span");
    for (const auto& v : report.aggregate) {
        ctx.out << fmt::format("{:<20} {:>8.4f} {:>8.4f} {:>8.4f} {:>8.2f}\n", v.variant, v.j.mean,
                               v.f.mean, v.jf.mean, v.span.mean);
    }
    const auto ranking = report.ranking();
    ctx.out << "ranking by J&F: ";
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        ctx.out << (i ? " > " : "") << ranking[i];
    }
    ctx.out << (report.ordering_significant() ? "\n" : " (differences not significant)\n");
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct GradcheckArgs {
    std::vector<std::string> ops;
    std::size_t seeds = 50;
    double eps = 1e-5;
};

constexpr double kGradTolerance = 1e-5;

int cmd_gradcheck(const Context& ctx, const GradcheckArgs& a) {
    auto ops = split_list(a.ops);
    if (ops.empty()) {
        ops = kernels::grad_check_ops();
    }
    for (const auto& op : ops) {
        const auto& known = kernels::grad_check_ops();
        if (std::find(known.begin(), known.end(), op) == known.end()) {
            throw ConfigError(fmt::format("unknown op '{}'", op));
        }
    }
    if (a.seeds == 0) {
        throw ConfigError("gradcheck: --seeds must be positive");
    }
    if (!(a.eps > 0.0)) {
        throw ConfigError("gradcheck: --eps must be positive");
    }
    if (a.eps < kernels::kGradCheckMinEps || a.eps > kernels::kGradCheckMaxEps) {
        ctx.err << fmt::format(
            "warning: eps {:g} is outside the validated range [{:g}, {:g}]; finite-difference "
            "errors may not reflect the analytic gradients\n",
            a.eps, kernels::kGradCheckMinEps, kernels::kGradCheckMaxEps);
    }
    std::string csv = "op,seed,eps,max_rel_error,worst_variable,checked\n";
    bool ok = true;
    ctx.out << fmt::format("{:<18} {:>6} {:>14} {:>6}\n", "op", "seeds", "max_rel_error", "");
    for (const auto& op : ops) {
        double worst = 0.0;
        for (std::size_t i = 0; i < a.seeds; ++i) {
            const auto seed = ctx.globals.seed + i;
            const auto r = kernels::grad_check(op, seed, a.eps);
            worst = std::max(worst, r.max_rel_error);
            csv += fmt::format("{},{},{:g},{:.6e},{},{}\n", op, seed, a.eps, r.max_rel_error,
                               r.worst_variable, r.checked);
        }
        const bool pass = worst < kGradTolerance;
        ok = ok && pass;
        ctx.out << fmt::format("{:<18} {:>6} {:>14.3e} {:>6}\n", op, a.seeds, worst,
                               pass ? "ok" : "FAIL");
    }
    const auto dir = out_dir(ctx.globals);
    RunManifest m;
    m.command = "gradcheck";
    m.seeds = seed_range(ctx.globals.seed, a.seeds);
    m.config_hash = fnv1a_hex("");
    m.outputs.push_back(write_output(dir, "gradcheck.csv", csv));
    finish_manifest(ctx, std::move(m), dir);
    return ok ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
    std::int64_t frames = 10000;
    std::vector<std::string> policies{"vanilla,extended,interval,dlm"};
    int repeats = 5;
    int window = 200;
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<StreamRecord> bench_stream(std::int64_t frames, std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0xbe7c));
    std::vector<StreamRecord> out;
    out.reserve(static_cast<std::size_t>(frames));
    for (std::int64_t t = 0; t < frames; ++t) {
        StreamRecord r;
        r.report.frame = FrameIndex{t};
        r.report.iou_score = rng.uniform(0.9, 1.0);
        r.report.occlusion_logit = 6.0;
        std::vector<double> e(16);
        for (auto& x : e) {
            x = rng.normal();
        }
        r.report.embedding = Embedding(std::move(e));
        r.report.mask = MaskGrid(8, 8);
        out.push_back(std::move(r));
    }
    return out;
}

std::string machine_descriptor() {
    utsname u{};
    std::string os = "unknown";
    if (uname(&u) == 0) {
        os = fmt::format("{} {} {}", u.sysname, u.release, u.machine);
    }
    return fmt::format("{}; {} hardware threads; compiler {}", os,
                       std::thread::hardware_concurrency(), __VERSION__);
}

int cmd_bench(const Context& ctx, const BenchArgs& a) {
    constexpr std::int64_t kEarly = 100;
    constexpr std::int64_t kMid = 1000;
    if (a.frames < 1000) {
        throw ConfigError(fmt::format("bench: --frames must be at least 1000, got {}", a.frames));
    }
    if (a.repeats < 1 || a.window < 1 || a.window > 900) {
        throw ConfigError("bench: --repeats must be >= 1 and --window within [1, 900]");
    }
    const auto policies = split_list(a.policies);
    const auto records = bench_stream(a.frames, ctx.globals.seed);
    auto backend = std::make_shared<const tracker::ReplayBackend>(records);
    const auto payloads = backend->payloads();
    const std::int64_t positions[] = {kEarly, kMid, a.frames};

    bool ok = true;
    json results = json::array();
    ctx.out << fmt::format("{:<10} {:>12} {:>12} {:>12} {:>8}\n", "policy", "ns@100", "ns@1000",
                           fmt::format("ns@{}", a.frames), "ratio");
    for (const auto& name : policies) {
        TrackerConfig cfg;
        cfg.policy = parse_policy(name);
        std::vector<std::vector<double>> samples(3);
        for (int r = 0; r < a.repeats; ++r) {
            tracker::Tracker tr(cfg, backend, Embedding{1.0});
            std::vector<double> per_frame;
            per_frame.reserve(payloads.size());
            for (const auto& p : payloads) {
                per_frame.push_back(static_cast<double>(tr.step(p).policy_time_ns));
            }
            for (std::size_t k = 0; k < 3; ++k) {
                const auto end = std::min<std::int64_t>(positions[k] + a.window / 2, a.frames);
                const auto begin = std::max<std::int64_t>(end - a.window, 0);
                double sum = 0.0;
                for (auto i = begin; i < end; ++i) {
                    sum += per_frame[static_cast<std::size_t>(i)];
                }
                samples[k].push_back(sum / static_cast<double>(end - begin));
            }
        }
        const double t0 = median(samples[0]);
        const double t1 = median(samples[1]);
        const double t2 = median(samples[2]);
        const double ratio = t2 / t0;
        const bool pass = ratio < 2.0;
        ok = ok && pass;
        ctx.out << fmt::format("{:<10} {:>12.1f} {:>12.1f} {:>12.1f} {:>8.3f} {}\n", name, t0, t1,
                               t2, ratio, pass ? "" : "FAIL");
        results.push_back({{"policy", name},
                           {"mean_ns_at", {{"100", t0}, {"1000", t1}, {std::to_string(a.frames), t2}}},
                           {"ratio", ratio},
                           {"o1_bound_held", pass}});
    }

    // Selective-scan scaling: doubling the sequence should roughly double the time.
    Rng rng(mix_seed(ctx.globals.seed, 0x5ca1));
    auto sp = kernels::ScanParams::zeros(16, 8);
    for (auto& v : sp.tensors()) {
        for (auto& x : v.data) {
            x = rng.uniform(-0.5, 0.5);
        }
    }
    volatile double sink = 0.0;
    auto tokens = [&](Eigen::Index len) {
        kernels::Matrix x(len, 16);
        for (auto& v : x.reshaped()) {
            v = rng.uniform(-1.0, 1.0);
        }
        return x;
    };
    const auto x_short = tokens(2048);
    const auto x_long = tokens(4096);
    auto time_once = [&](const kernels::Matrix& x) {
        const auto s = Clock::now();
        const auto y = kernels::selective_scan(x, sp);
        const double secs = std::chrono::duration<double>(Clock::now() - s).count();
        sink = sink + y(x.rows() - 1, 0);
        return secs;
    };
    // interleaved, so both lengths share machine conditions
    std::vector<double> ts, tl;
    for (int r = 0; r < 15; ++r) {
        ts.push_back(time_once(x_short));
        tl.push_back(time_once(x_long));
    }
    const double short_scan = median(ts);
    const double long_scan = median(tl);
    const double scan_ratio = long_scan / short_scan;
    const bool scan_ok = scan_ratio <= 2.5;
    ok = ok && scan_ok;
    ctx.out << fmt::format("selective_scan 2048 -> 4096 tokens: {:.3f} ms -> {:.3f} ms, ratio {:.3f}{}\n",
                           short_scan * 1e3, long_scan * 1e3, scan_ratio, scan_ok ? "" : " FAIL");

    // Reference throughput of the untrained neural backend; no target.
    constexpr int kToyFrames = 60;
    auto toy = std::make_shared<const kernels::ToyNeuralBackend>(
        kernels::CSTMambaParams::random(ctx.globals.seed, 8, 4, 2), 16, 16);
    std::vector<tracker::FramePayload> toy_frames;
    for (int t = 0; t < kToyFrames; ++t) {
        kernels::FeatureGrid g{8, 8, kernels::Matrix(64, 8)};
        for (auto& v : g.tokens.reshaped()) {
            v = rng.uniform(-1.0, 1.0);
        }
        toy_frames.push_back({FrameIndex{t}, std::move(g)});
    }
    std::vector<double> text(8, 0.25);
    tracker::Tracker toy_tracker(TrackerConfig{}, toy, Embedding(text));
    const auto toy_start = Clock::now();
    tracker::run_stream(toy_tracker, toy_frames);
    const double fps =
        kToyFrames / std::chrono::duration<double>(Clock::now() - toy_start).count();
    ctx.out << fmt::format("toy backend end-to-end: {:.1f} frames/s (8x8x8 features, reference only)\n",
                           fps);

    const auto machine = machine_descriptor();
    ctx.out << "engine " << kEngineVersion << " on " << machine << "\n";
    json doc{{"engine_version", kEngineVersion},
             {"machine", machine},
             {"frames", a.frames},
             {"repeats", a.repeats},
             {"window", a.window},
             {"policies", results},
             {"scan_scaling", {{"seconds_2048", short_scan}, {"seconds_4096", long_scan}, {"ratio", scan_ratio}, {"bound", 2.5}, {"held", scan_ok}}},
             {"toy_backend_fps", fps},
             {"passed", ok}};
    const auto dir = out_dir(ctx.globals);
    RunManifest m;
    m.command = "bench";
    m.seeds = {ctx.globals.seed};
    m.config_hash = fnv1a_hex("");
    m.outputs.push_back(write_output(dir, "bench.json", doc.dump(2) + "\n", false));
    finish_manifest(ctx, std::move(m), dir);
    return ok ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------

int cmd_replay(const Context& ctx, const std::string& manifest_path) {
    const fs::path path(manifest_path);
    const auto original = RunManifest::from_json(read_file(path));
    const fs::path source_dir = path.parent_path();
    const auto dir = out_dir(ctx.globals);
    if (fs::exists(dir) && fs::equivalent(dir, source_dir.empty() ? fs::path(".") : source_dir)) {
        throw ConfigError("replay: --out must differ from the manifest's directory");
    }
    if (original.engine_version != kEngineVersion) {
        ctx.err << fmt::format("warning: manifest written by engine {}, replaying with {}\n",
                               original.engine_version, kEngineVersion);
    }
    std::vector<std::string> args{"--out", dir.string()};
    args.insert(args.end(), original.args.begin(), original.args.end());
    std::ostringstream sink;
    const int code = run(args, sink, ctx.err);
    if (code == kExitUsage) {
        return code;
    }
    const auto replayed = RunManifest::from_json(read_file(dir / kManifestFile));
    if (replayed.config_hash != original.config_hash) {
        ctx.err << "replay: configuration changed since the manifest was written\n";
        return kExitUsage;
    }
    bool identical = true;
    for (const auto& o : original.outputs) {
        const auto it = std::find_if(replayed.outputs.begin(), replayed.outputs.end(),
                                     [&](const auto& r) { return r.file == o.file; });
        if (!o.deterministic) {
            ctx.out << fmt::format("skip    {} (wall-clock measurements)\n", o.file);
            continue;
        }
        const bool same = it != replayed.outputs.end() && it->hash == o.hash;
        identical = identical && same;
        ctx.out << fmt::format("{} {}\n", same ? "same   " : "DIFFERS", o.file);
    }
    ctx.out << (identical ? "replay reproduced every deterministic output\n"
                          : "replay produced different outputs\n");
    return identical ? code : kExitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Streaming long-term tracking engine"};
    app.name("cltrack");
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--out", g.out, fmt::format("Output directory (default ${} or ./cltrack-out)", kOutEnv));
    app.add_option("--seed", g.seed, "Base seed");
    app.add_option("--config", g.config, "Scene configuration file (JSON)");

    VerifyArgs va;
    auto* verify_cmd = app.add_subcommand("verify", "Run the property and oracle suites");
    verify_cmd->add_option("--suite", va.suites, "Suites to run (gate, memory, scan, metrics, gradients)");
    verify_cmd->add_option("--mutate", va.mutate, "Inject a known defect: gate-window, diversity-argmax, scan-decay");

    SimulateArgs sa;
    auto* sim_cmd = app.add_subcommand("simulate", "Track one synthetic scene or a recorded stream");
    sim_cmd->add_option("--scenario", sa.scenario, "Built-in scenario when no --config is given");
    sim_cmd->add_option("--policy", sa.policy, "Memory policy: vanilla, extended, interval, dlm");
    sim_cmd->add_option("--gate", sa.gate, "Initial-frame gate: credible or first");
    sim_cmd->add_option("--stream", sa.stream, "Replay a recorded JSON-lines stream instead");
    sim_cmd->add_option("--tolerance", sa.tolerance, "Boundary tolerance in pixels for F");
    sim_cmd->add_flag("--timing", sa.timing, "Record per-frame policy wall time");

    CompareArgs ca;
    auto* cmp_cmd = app.add_subcommand("compare", "Compare memory policies over many seeds");
    cmp_cmd->add_option("--scenario", ca.scenario, "Built-in scenario when no --config is given");
    cmp_cmd->add_option("--policies", ca.policies, "Comma-separated policies");
    cmp_cmd->add_option("--gates", ca.gates, "Comma-separated gates (credible, first)");
    cmp_cmd->add_option("--seeds", ca.seeds, "Number of seeds");
    cmp_cmd->add_option("--tolerance", ca.tolerance, "Boundary tolerance in pixels for F");
    cmp_cmd->add_flag("--timing", ca.timing, "Record policy wall time");

    GradcheckArgs ga;
    auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of kernel gradients");
    grad_cmd->add_option("--ops", ga.ops, "Comma-separated ops (default: all)");
    grad_cmd->add_option("--seeds", ga.seeds, "Seeds per op");
    grad_cmd->add_option("--eps", ga.eps, "Central-difference step");

    BenchArgs ba;
    auto* bench_cmd = app.add_subcommand("bench", "Measure per-frame policy overhead");
    bench_cmd->add_option("--frames", ba.frames, "Stream length (>= 1000)");
    bench_cmd->add_option("--policy,--policies", ba.policies, "Comma-separated policies");
    bench_cmd->add_option("--repeats", ba.repeats, "Runs per policy");
    bench_cmd->add_option("--window", ba.window, "Frames averaged around each position");

    std::string manifest;
    auto* replay_cmd = app.add_subcommand("replay", "Re-run a command from its manifest and compare outputs");
    replay_cmd->add_option("manifest", manifest, "manifest.json of an earlier run")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    const Context ctx{g, without_out(args), out, err};
    try {
        if (*verify_cmd) return cmd_verify(ctx, va);
        if (*sim_cmd) return cmd_simulate(ctx, sa);
        if (*cmp_cmd) return cmd_compare(ctx, ca);
        if (*grad_cmd) return cmd_gradcheck(ctx, ga);
        if (*bench_cmd) return cmd_bench(ctx, ba);
        if (*replay_cmd) return cmd_replay(ctx, manifest);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace cltrack::cli

#include "cltrack/sim/compare.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "cltrack/core/error.hpp"
#include "cltrack/sim/oracle_backend.hpp"

namespace cltrack::sim {

PolicyVariant policy_variant(MemoryPolicy policy, const TrackerConfig& base) {
    PolicyVariant v;
    v.name = std::string(to_string(policy));
    v.config = base;
    v.config.policy = policy;
    return v;
}

Evaluation evaluate_run(std::span<const tracker::StepOutput> steps, const GroundTruth& truth,
                        double tolerance) {
    if (steps.size() != truth.size()) {
        throw PreconditionError(fmt::format("run has {} frames, ground truth {}", steps.size(),
                                            truth.size()));
    }
    std::vector<MaskGrid> pred;
    pred.reserve(steps.size());
    for (const auto& s : steps) {
        pred.push_back(s.report.mask);
    }
    Evaluation e;
    e.j = evaluate_j(pred, truth.masks);
    e.f = evaluate_f(pred, truth.masks, tolerance);
    e.jf = jf_mean(e.j, e.f);
    return e;
}

SimulationResult simulate(const SceneScript& script, const PolicyVariant& variant,
                          std::uint64_t seed, double tolerance) {
    auto seeded = script;
    seeded.seed = seed;
    auto scene = std::make_shared<const Scene>(generate_stream(seeded));
    auto backend = std::make_shared<const OracleBackend>(scene, seed);
    tracker::Tracker tracker(variant.config, backend, Embedding{1.0}, variant.gate_mode);
    SimulationResult result;
    result.seed = seed;
    result.record = tracker::run_stream(tracker, scene->frames);
    result.metrics = evaluate_run(result.record.steps, scene->truth, tolerance);
    return result;
}

Stat describe(std::span<const double> values) {
    Stat s;
    if (values.empty()) {
        return s;
    }
    const auto n = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (const double v : values) {
            ss += (v - s.mean) * (v - s.mean);
        }
        s.stddev = std::sqrt(ss / (n - 1.0));
    }
    return s;
}

std::vector<std::string> CompareReport::ranking() const {
    std::vector<const VariantAggregate*> order;
    for (const auto& a : aggregate) {
        order.push_back(&a);
    }
    std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
        return a->jf.mean > b->jf.mean;
    });
    std::vector<std::string> names;
    for (const auto* a : order) {
        names.push_back(a->variant);
    }
    return names;
}

bool CompareReport::ordering_significant() const {
    const auto names = ranking();
    auto find = [&](const std::string& name) -> const VariantAggregate& {
        return *std::find_if(aggregate.begin(), aggregate.end(),
                             [&](const auto& a) { return a.variant == name; });
    };
    for (std::size_t i = 0; i + 1 < names.size(); ++i) {
        const auto& a = find(names[i]);
        const auto& b = find(names[i + 1]);
        const double se = std::sqrt(a.jf.stddev * a.jf.stddev / static_cast<double>(a.runs) +
                                    b.jf.stddev * b.jf.stddev / static_cast<double>(b.runs));
        if (!(a.jf.mean - b.jf.mean > 2.0 * se)) {
            return false;
        }
    }
    return !names.empty();
}

CompareReport compare_policies(const SceneScript& script, std::span<const PolicyVariant> variants,
                               const CompareOptions& options) {
    if (variants.size() < 2) {
        throw PreconditionError("compare_policies needs at least two variants");
    }
    if (options.seeds == 0) {
        throw PreconditionError("compare_policies needs at least one seed");
    }
    for (const auto& v : variants) {
        v.config.validate();
    }
    CompareReport report;
    for (const auto& v : variants) {
        std::vector<double> j, f, jf, span, time;
        for (std::size_t i = 0; i < options.seeds; ++i) {
            const auto seed = options.base_seed + i;
            const auto run = simulate(script, v, seed, options.tolerance);
            CompareRow row;
            row.variant = v.name;
            row.seed = seed;
            row.metrics = run.metrics;
            row.selected = !run.record.summary.no_initial_frame;
            row.mean_span = run.record.summary.mean_span;
            row.mean_policy_time_ns = run.record.summary.mean_policy_time_ns;
            j.push_back(row.metrics.j);
            f.push_back(row.metrics.f);
            jf.push_back(row.metrics.jf);
            span.push_back(row.mean_span);
            time.push_back(row.mean_policy_time_ns);
            report.rows.push_back(std::move(row));
        }
        report.aggregate.push_back(
            {v.name, options.seeds, describe(j), describe(f), describe(jf), describe(span),
             describe(time)});
    }
    return report;
}

void write_compare_csv(std::ostream& out, const CompareReport& report,
                       const ReportOptions& options) {
    out << "variant,seed,j,f,jf,selected,mean_span,policy_time_ns\n";
    for (const auto& r : report.rows) {
        out << fmt::format("{},{},{:.6f},{:.6f},{:.6f},{},{:.3f},", r.variant, r.seed,
                           r.metrics.j, r.metrics.f, r.metrics.jf, r.selected ? 1 : 0,
                           r.mean_span);
        if (options.include_timing) {
            out << fmt::format("{:.1f}", r.mean_policy_time_ns);
        }
        out << '\n';
    }
}

void write_aggregate_csv(std::ostream& out, const CompareReport& report,
                         const ReportOptions& options) {
    out << "variant,runs,j_mean,j_std,f_mean,f_std,jf_mean,jf_std,span_mean,span_std,"
           "policy_time_ns_mean,policy_time_ns_std\n";
    for (const auto& a : report.aggregate) {
        out << fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.3f},{:.3f},",
                           a.variant, a.runs, a.j.mean, a.j.stddev, a.f.mean, a.f.stddev,
                           a.jf.mean, a.jf.stddev, a.span.mean, a.span.stddev);
        if (options.include_timing) {
            out << fmt::format("{:.1f},{:.1f}", a.policy_time_ns.mean, a.policy_time_ns.stddev);
        } else {
            out << ',';
        }
        out << '\n';
    }
}

std::string aggregate_json(const CompareReport& report, const ReportOptions& options) {
    auto stat = [](const Stat& s) { return nlohmann::json{{"mean", s.mean}, {"std", s.stddev}}; };
    nlohmann::json variants = nlohmann::json::array();
    for (const auto& a : report.aggregate) {
        nlohmann::json v{{"variant", a.variant}, {"runs", a.runs},   {"j", stat(a.j)},
                         {"f", stat(a.f)},       {"jf", stat(a.jf)}, {"span", stat(a.span)}};
        if (options.include_timing) {
            v["policy_time_ns"] = stat(a.policy_time_ns);
        }
        variants.push_back(std::move(v));
    }
    nlohmann::json doc{{"variants", std::move(variants)},
                       {"ranking", report.ranking()},
                       {"ordering_significant", report.ordering_significant()}};
    return doc.dump(2) + "\n";
}

}  // namespace cltrack::sim

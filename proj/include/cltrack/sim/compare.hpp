#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cltrack/core/config.hpp"
#include "cltrack/sim/metrics.hpp"
#include "cltrack/sim/scene.hpp"
#include "cltrack/tracker/run.hpp"

namespace cltrack::sim {

struct PolicyVariant {
    std::string name;
    TrackerConfig config;
    tracker::GateMode gate_mode = tracker::GateMode::Credible;
};

/// Variant named after the policy, sharing every other setting of `base`.
PolicyVariant policy_variant(MemoryPolicy policy, const TrackerConfig& base = {});

struct Evaluation {
    double j = 0.0;
    double f = 0.0;
    double jf = 0.0;
};

Evaluation evaluate_run(std::span<const tracker::StepOutput> steps, const GroundTruth& truth,
                        double tolerance = kDefaultBoundaryTolerance);

struct SimulationResult {
    std::uint64_t seed = 0;
    tracker::RunRecord record;
    Evaluation metrics;
};

/// Generates the scene with script.seed = seed, runs one tracker over it with an oracle
/// backend seeded alike, and evaluates every frame against the ground truth.
SimulationResult simulate(const SceneScript& script, const PolicyVariant& variant,
                          std::uint64_t seed, double tolerance = kDefaultBoundaryTolerance);

struct CompareOptions {
    std::size_t seeds = 20;
    std::uint64_t base_seed = 0;
    double tolerance = kDefaultBoundaryTolerance;
};

struct CompareRow {
    std::string variant;
    std::uint64_t seed = 0;
    Evaluation metrics;
    bool selected = false;
    double mean_span = 0.0;
    double mean_policy_time_ns = 0.0;
};

struct Stat {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for a single run
};

Stat describe(std::span<const double> values);

struct VariantAggregate {
    std::string variant;
    std::size_t runs = 0;
    Stat j, f, jf, span, policy_time_ns;
};

struct CompareReport {
    std::vector<CompareRow> rows;  // variant-major, seeds ascending
    std::vector<VariantAggregate> aggregate;

    /// Variant names by decreasing mean J&F (stable for equal means).
    std::vector<std::string> ranking() const;

    /// True when every adjacent pair in ranking() differs by more than twice the standard
    /// error of the difference of means.
    bool ordering_significant() const;
};

/// Every variant runs on the same scenes, seeds base_seed .. base_seed + seeds - 1.
/// Throws PreconditionError with fewer than two variants or zero seeds.
CompareReport compare_policies(const SceneScript& script, std::span<const PolicyVariant> variants,
                               const CompareOptions& options = {});

struct ReportOptions {
    bool include_timing = false;
};

/// Header: variant,seed,j,f,jf,selected,mean_span,policy_time_ns
void write_compare_csv(std::ostream& out, const CompareReport& report,
                       const ReportOptions& options = {});

/// Header: variant,runs,j_mean,j_std,f_mean,f_std,jf_mean,jf_std,span_mean,span_std,
/// policy_time_ns_mean,policy_time_ns_std
void write_aggregate_csv(std::ostream& out, const CompareReport& report,
                         const ReportOptions& options = {});

/// Aggregate statistics, ranking and ordering significance as a JSON document.
std::string aggregate_json(const CompareReport& report, const ReportOptions& options = {});

}  // namespace cltrack::sim

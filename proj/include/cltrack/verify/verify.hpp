#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cltrack/core/fault.hpp"

namespace cltrack::verify {

struct SuiteResult {
    std::string name;
    std::size_t cases = 0;
    std::vector<std::string> failures;  // first few failing cases, human readable
    std::size_t failed = 0;

    bool passed() const { return failed == 0; }
};

struct VerifyOptions {
    std::vector<std::string> suites;  // empty runs every suite
    std::uint64_t seed = 0;
    fault::Fault mutate = fault::Fault::None;
};

/// gate, memory, scan, metrics, gradients
const std::vector<std::string>& suite_names();

/// Runs the selected property/oracle suites. Throws ConfigError on an unknown suite name.
std::vector<SuiteResult> run_verify(const VerifyOptions& options);

/// Accepts "gate-window", "diversity-argmax", "scan-decay".
fault::Fault parse_mutation(const std::string& name);

}  // namespace cltrack::verify

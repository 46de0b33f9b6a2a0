#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cltrack/kernels/tensor.hpp"

namespace cltrack::kernels {

inline constexpr double kGradCheckMinEps = 1e-6;
inline constexpr double kGradCheckMaxEps = 1e-3;

/// A differentiable op packaged for finite-difference checking.
///
/// `variables` point into storage owned by the problem (parameters first, then inputs).
/// `loss` evaluates sum(outputs) at the current variable values; `analytic` returns the
/// gradient of that loss, flattened tensor by tensor in the order of `variables`.
struct GradProblem {
    std::string op;
    std::vector<TensorView> variables;
    std::function<double()> loss;
    std::function<std::vector<std::vector<double>>()> analytic;
    std::shared_ptr<void> storage;
};

struct GradCheckResult {
    std::string op;
    std::uint64_t seed = 0;
    double eps = 0.0;
    double max_rel_error = 0.0;
    std::string worst_variable;
    std::size_t checked = 0;
    bool eps_in_validated_range = true;
};

/// Ops with an analytic backward: selective_scan, dwconv7x7, dwconv7x7_input,
/// inverted_mlp, cross_attention, layer_norm. dwconv7x7_input holds the kernel fixed and
/// only differentiates the input grid.
const std::vector<std::string>& grad_check_ops();

/// Random toy-sized problem for `op`. Throws PreconditionError on an unknown op.
GradProblem make_grad_problem(std::string_view op, std::uint64_t seed);

/// max over every variable element of |analytic - numeric| / max(1, |numeric|), with the
/// numeric derivative from central differences of step `eps`.
/// Throws NumericError if an analytic gradient is non-finite.
GradCheckResult grad_check(GradProblem& problem, double eps);
GradCheckResult grad_check(std::string_view op, std::uint64_t seed, double eps);

}  // namespace cltrack::kernels

#pragma once

#include "cltrack/core/types.hpp"

namespace cltrack {

/// Logistic function. Throws NumericError on non-finite input.
double sigmoid(double x);

/// dot(a,b) / (|a||b|), clamped to [-1, 1].
/// Throws PreconditionError on dimension mismatch or a zero-norm operand.
double cosine_similarity(const Embedding& a, const Embedding& b);

}  // namespace cltrack

#include "cltrack/core/math.hpp"

#include <algorithm>
#include <cmath>

#include "cltrack/core/error.hpp"

namespace cltrack {

double sigmoid(double x) {
    if (!std::isfinite(x)) {
        throw NumericError("sigmoid: non-finite input");
    }
    // Evaluate on the side that cannot overflow.
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim()) {
        throw PreconditionError("cosine_similarity: dimension mismatch");
    }
    const double na = a.norm();
    const double nb = b.norm();
    if (!(na > 0.0) || !(nb > 0.0)) {
        throw PreconditionError("cosine_similarity: zero-norm embedding");
    }
    return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

}  // namespace cltrack

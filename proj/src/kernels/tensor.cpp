#include "cltrack/kernels/tensor.hpp"

#include "cltrack/core/error.hpp"

namespace cltrack::kernels {

void require(bool ok, const char* what) {
    if (!ok) {
        throw PreconditionError(what);
    }
}

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) {
        throw NumericError(what);
    }
}

void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) {
        throw NumericError(what);
    }
}

}  // namespace cltrack::kernels

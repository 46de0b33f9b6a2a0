#include "cltrack/core/random.hpp"

#include <cmath>
#include <numbers>

namespace cltrack {

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

double Rng::truncated_normal(double stddev, double bound) {
    for (;;) {
        const double z = normal();
        if (std::abs(z) <= bound) {
            return stddev * z;
        }
    }
}

}  // namespace cltrack

#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace drift {

/// Platform-independent uniform draws.
///
/// std::mt19937_64 is bit-exactly specified by the standard; the standard
/// distributions are not, so doubles are formed directly from the top 53
/// bits of each draw.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    Eigen::VectorXd uniform_vector(Eigen::Index n, double lo, double hi) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
        return v;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace drift

#pragma once

#include <pdrisk/types.hpp>

#include <cstdint>
#include <random>

namespace testing_support {

using pdrisk::Index;
using pdrisk::Vector;

/// Plain generator for test inputs, separate from the library's streams.
struct Rng {
    std::mt19937_64 eng;
    explicit Rng(std::uint64_t seed) : eng(seed) {}

    double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng); }
    double uniform(double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(eng);
    }
    Index integer(Index a, Index b) {
        return std::uniform_int_distribution<Index>(a, b)(eng);
    }
    Vector normal_vector(Index n, double scale = 1.0) {
        Vector v(n);
        for (Index i = 0; i < n; ++i)
            v[i] = scale * normal();
        return v;
    }
};

inline double max_abs_diff(const Vector &a, const Vector &b) {
    return (a - b).cwiseAbs().maxCoeff();
}

} // namespace testing_support

#pragma once

#include <cstdint>
#include <random>

#include "spakit/matrix.hpp"

namespace testutil {

inline spakit::Dense gaussian(std::mt19937_64& g, Eigen::Index m, Eigen::Index n) {
    std::normal_distribution<double> d;
    spakit::Dense A(m, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < m; ++i) A(i, j) = d(g);
    return A;
}

inline spakit::Dense uniform(std::mt19937_64& g, Eigen::Index m, Eigen::Index n) {
    std::uniform_real_distribution<double> d;
    spakit::Dense A(m, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < m; ++i) A(i, j) = d(g);
    return A;
}

// Column-stochastic H = [I_r, Dirichlet(1) columns].
inline spakit::Dense separable_h(std::mt19937_64& g, Eigen::Index r, Eigen::Index n) {
    std::exponential_distribution<double> e(1.0);
    spakit::Dense H = spakit::Dense::Zero(r, n);
    H.leftCols(r).setIdentity();
    for (Eigen::Index j = r; j < n; ++j) {
        for (Eigen::Index i = 0; i < r; ++i) H(i, j) = e(g);
        H.col(j) /= H.col(j).sum();
    }
    return H;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testutil

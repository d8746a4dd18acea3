#pragma once

#include <cstddef>

#include "spakit/matrix.hpp"
#include "spakit/spa.hpp"

namespace spakit {

/// {x | x^T A x <= 1}, the minimum-volume ellipsoid centered at the origin.
struct CenteredEllipsoid {
    Dense A;          // r x r, symmetric positive definite
    Vector weights;   // design weights, nonnegative, sum to one
    double dual_gap;  // max_j p_j^T A p_j - 1
    std::size_t iterations = 0;
};

inline constexpr double kMveTolerance = 1e-9;
inline constexpr std::size_t kMveMaxIterations = 100000;

/// Centered MVE of the columns of P (r x n) through its D-optimal design dual,
/// solved by Khachiyan coordinate ascent with Wolfe-Atwood away steps.
/// Stops once every point satisfies p^T A p <= 1 + tol and every support
/// point p^T A p >= 1 - tol.
CenteredEllipsoid khachiyan_centered_mve(const Dense& P, double tol = kMveTolerance,
                                         std::size_t max_iter = kMveMaxIterations);

struct MvePreconditioning {
    Dense reduced;         // Sigma_r V_r^T, r x n
    CenteredEllipsoid ellipsoid;
    Dense sqrt_A;          // symmetric square root of ellipsoid.A
    Dense preconditioned;  // sqrt_A * reduced
};

/// Rank-r reduction by truncated SVD, centered MVE, then whitening by A^{1/2}.
MvePreconditioning mve_precondition(const DataMatrix& X, std::size_t r, double tol = kMveTolerance);

ExtractionResult mve_spa(const DataMatrix& X, std::size_t r, const TieBreakRule& tb = {},
                         double tol = kMveTolerance);

struct Spa2Trace {
    ExtractionResult phase1;
    ExtractionResult phase2;
    Dense preconditioned;  // X(:, phase1)^+ X
};

/// SPA preconditioned with the pseudo-inverse of its own first selection.
Spa2Trace spa2_trace(const DataMatrix& X, std::size_t r, const TieBreakRule& tb = {});
ExtractionResult spa2(const DataMatrix& X, std::size_t r, const TieBreakRule& tb = {});

/// spa2 on the translated and lifted matrix.
ExtractionResult tlspa2(const DataMatrix& X, std::size_t r, const TieBreakRule& tb = {}, double alpha = 1.0);

/// det(G^T G) with G = [v_2 - v_1, ..., v_k - v_1]: the squared simplex volume
/// up to the factor ((k-1)!)^2. Numerically degenerate simplices return 0.
double simplex_volume_sq(const Dense& V);

/// Fast Anchor Words: T-SPA followed by a single pass over the positions, each
/// replaced by the column maximizing the simplex volume when that strictly
/// improves on the incumbent.
ExtractionResult faw(const DataMatrix& X, std::size_t r, const TieBreakRule& tb = {});

}  // namespace spakit

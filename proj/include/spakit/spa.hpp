#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "spakit/matrix.hpp"

namespace spakit {

struct ExtractionResult {
    std::vector<std::size_t> indices;  // selection order
    std::vector<double> step_norms;    // residual norm of the selected column at each step
    std::string algorithm;
};

enum class TieBreakMode { lowest_index, highest_index, adversarial_callback };

/// Receives the step (0-based) and the ascending list of tied candidates;
/// must return one of them.
using TieBreakCallback = std::function<std::size_t(std::size_t step, std::span<const std::size_t> candidates)>;

struct TieBreakRule {
    TieBreakMode mode = TieBreakMode::lowest_index;
    TieBreakCallback choose;

    static TieBreakRule lowest() { return {}; }
    static TieBreakRule highest() { return {TieBreakMode::highest_index, {}}; }
    static TieBreakRule adversarial(TieBreakCallback cb) {
        return {TieBreakMode::adversarial_callback, std::move(cb)};
    }

    /// Prefer `target` at `step` whenever it is among the tied columns,
    /// lowest index otherwise.
    static TieBreakRule prefer(std::size_t step, std::size_t target);

    std::size_t pick(std::size_t step, std::span<const std::size_t> candidates) const;
};

struct LiftShiftParams {
    Vector v;        // translation, length m
    double c = 1.0;  // lift height, > 0
};

// Norms within this relative band of the maximum are treated as tied.
inline constexpr double kTieTolerance = 1e-12;
// Extraction stops with RankDeficientError once every residual norm is below
// this fraction of K(X).
inline constexpr double kRankTolerance = 1e-13;

/// Successive projection. Works from a squared-norm vector updated through
/// ||(I - uu^T) y||^2 = ||y||^2 - (u^T y)^2, so the cost is r products with
/// X^T and the dense residual is never formed.
ExtractionResult spa(const DataMatrix& X, std::size_t r, const TieBreakRule& tb = {});

/// Literal form that materializes and projects the dense residual. Test oracle.
ExtractionResult spa_naive(const DataMatrix& X, std::size_t r, const TieBreakRule& tb = {});

/// Translated SPA: the first projection is replaced by subtracting the
/// selected column from every column. Extracts up to rank + 1 vertices.
ExtractionResult tspa(const DataMatrix& X, std::size_t r, const TieBreakRule& tb = {});

/// v = column mean, c = alpha * (min_i ||x_i - v|| / sqrt(r) + ||X - v e^T||_F / sqrt(n)) / 2.
LiftShiftParams compute_lift_shift(const DataMatrix& X, std::size_t r, double alpha = 1.0);

/// Explicit (X - v e^T ; c e^T), dense (m+1) x n.
DataMatrix lift_shift(const DataMatrix& X, const LiftShiftParams& p);

/// SPA on the translated and lifted data. The lift is applied lazily, so
/// sparse input stays sparse.
ExtractionResult tlspa(const DataMatrix& X, std::size_t r, const TieBreakRule& tb = {}, double alpha = 1.0);

/// SPA on (X - v e^T ; c e^T) for caller-supplied parameters, without forming it.
ExtractionResult spa_lifted(const DataMatrix& X, const LiftShiftParams& p, std::size_t r,
                            const TieBreakRule& tb = {});

}  // namespace spakit

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spakit/matrix.hpp"

namespace spakit {

/// Outcome of a seeded property suite. worst_ratio is the largest
/// measured / bound seen; a sample violates when its ratio exceeds 1 or a
/// side condition (such as the matched weight) fails.
struct TheoryReport {
    std::string name;
    std::size_t samples = 0;
    std::size_t violations = 0;
    double worst_ratio = 0.0;
    std::vector<std::size_t> violating_samples;  // first few only
    bool pass = false;
};

struct PropertyOutcome {
    double ratio = 0.0;  // measured / bound
    bool holds = false;
};

// Error-bound constants of the single-step, rank-two and translated analyses.
inline constexpr double kThm31NoiseDivisor = 8.0;
inline constexpr double kThm31ErrorFactor = 33.0;
inline constexpr double kThm32NoiseDivisor = 305.0;
inline constexpr double kThm41NoiseDivisor = 374.0;

/// beta(c) = 4 / (1/2 - c gamma(c)), gamma(c) = 66 (33 c + 2) / (1 - c)^2.
double thm32_beta(double c);
/// 67 * 4 / (2 - sqrt 2).
double thm41_error_factor();

/// Midpoint inequality ||(w_i + w_j)/2|| <= max(||w_i||, ||w_j||) - 2 eps at
/// eps = sigma_r(W) / (8 kappa(W)), worst pair. Needs r <= m, r >= 2.
PropertyOutcome median_lemma_property(const Dense& W);

/// First SPA pick of X = [W Q] H + N lies within 33 kappa(W) eps of some w_i
/// whose weight in that column is at least 1/2. W holds the first k rows of H.
PropertyOutcome thm31_property(const Dense& W, const Dense& Q, const Dense& H, const Dense& N, double eps);

/// Two SPA picks on a rank-two W: step 1 within 33 kappa eps, step 2 within
/// (1 + beta) kappa eps of the other vertex.
PropertyOutcome thm32_property(const Dense& W, const Dense& Q, const Dense& H, const Dense& N, double eps);

/// First two T-SPA picks within 67 * 4/(2 - sqrt 2) kappa eps of distinct vertices.
PropertyOutcome thm41_property(const Dense& W, const Dense& H, const Dense& N, double eps);

/// sigma_r(W) <= 2/(2 - sqrt 2) sigma_{r-1}(What) and K(What) <= 2 K(W), where
/// What is the first r - 1 columns of W - v e^T and v = W lambda, lambda_r >= 1/2.
PropertyOutcome translated_sv_property(const Dense& W, const Vector& lambda);

TheoryReport check_median_lemma(std::size_t samples, std::uint64_t seed);
TheoryReport check_lift_cond(std::size_t samples, std::uint64_t seed);
TheoryReport check_thm31(std::size_t samples, std::uint64_t seed);
TheoryReport check_thm32(std::size_t samples, std::uint64_t seed);
TheoryReport check_thm41(std::size_t samples, std::uint64_t seed);
TheoryReport check_translated_sv(std::size_t samples, std::uint64_t seed);

/// median-lemma, lift-cond, thm31, thm32, thm41, translated-sv.
std::span<const char* const> theory_check_names();

/// Dispatch by name. Unknown names and samples = 0 raise InvalidArgument.
TheoryReport run_theory_check(const std::string& name, std::size_t samples, std::uint64_t seed);

}  // namespace spakit

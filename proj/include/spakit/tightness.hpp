#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spakit/matrix.hpp"

namespace spakit {

enum class WorstCaseFamily { spa, spa2, mve };

std::string family_name(WorstCaseFamily f);

using NamedValues = std::vector<std::pair<std::string, double>>;

/// X = W H + N with H separable; the columns of X are built from the closed
/// forms, not from the product, so the reconstruction is a real check.
struct WorstCaseInstance {
    DataMatrix W;
    DataMatrix H;
    DataMatrix N;
    DataMatrix X;
    NamedValues params;
    WorstCaseFamily family;
    std::pair<double, double> kappa_bounds;  // analytic lower / upper bounds on kappa(W)

    double param(const std::string& name) const;
};

struct CertificationRecord {
    std::string family;
    NamedValues params;
    std::vector<std::size_t> indices;  // adversarial run
    double measured_error = 0.0;
    double analytic_bound = 0.0;  // the bound measured_error is compared against
    NamedValues bounds;           // every link of the bound chain
    double kappa = 0.0;           // kappa(W) from the SVD
    bool pass = false;
    // Same instance under the lowest-index tie-break. Informational only.
    std::vector<std::size_t> lowest_index_indices;
    double lowest_index_error = 0.0;
};

/// 0 < delta < 1/4, K > 0, 0 < eps < K delta^2 / 3.
WorstCaseInstance build_spa_worstcase(double K, double delta, double eps);
/// SPA forced onto the perturbed interior point at step 2.
CertificationRecord certify_spa_tightness(const WorstCaseInstance& inst);

/// M > 0, 0 < delta < 1/2, 0 < eps < delta M / 6.
WorstCaseInstance build_spa2_worstcase(double M, double delta, double eps);
CertificationRecord certify_spa2_tightness(const WorstCaseInstance& inst);

/// M > 0, 0 < delta < 1, 0 < eps < delta M / 4.
WorstCaseInstance build_mve_worstcase(double M, double delta, double eps);
/// The preconditioned norms tie only up to the ellipsoid solver tolerance,
/// so certification solves the MVE far tighter than the default.
inline constexpr double kCertifyMveTolerance = 1e-14;
CertificationRecord certify_mve_tightness(const WorstCaseInstance& inst, double mve_tol = kCertifyMveTolerance);

CertificationRecord certify(const WorstCaseInstance& inst);

/// (piecewise formula, sigma_1 / sigma_r of (Wt ; c e^T)) for zero-mean Wt.
std::pair<double, double> check_lift_conditioning(const DataMatrix& Wt, double c);

/// family,params,measured_error,analytic_bound,kappa,pass
void write_certifications_csv(std::ostream& os, std::span<const CertificationRecord> records);

}  // namespace spakit

#include "spakit/precondition.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <fmt/format.h>

#include "spakit/error.hpp"

namespace spakit {

namespace {

// Leverage scores p_j^T S^{-1} p_j for S = P diag(u) P^T.
Vector leverages(const Dense& P, const Vector& u) {
    const Dense S = P * u.asDiagonal() * P.transpose();
    Eigen::LLT<Dense> llt(S);
    if (llt.info() != Eigen::Success) {
        throw RankDeficientError("khachiyan_centered_mve: design matrix lost positive definiteness");
    }
    const Dense G = llt.matrixL().solve(P);
    return G.colwise().squaredNorm().transpose();
}

Dense symmetric_sqrt(const Dense& A) {
    Eigen::SelfAdjointEigenSolver<Dense> eig(0.5 * (A + A.transpose()));
    Vector lambda = eig.eigenvalues();
    const double floor = 1e-14 * lambda.maxCoeff();
    lambda = lambda.cwiseMax(floor).cwiseSqrt();
    return eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

CenteredEllipsoid khachiyan_centered_mve(const Dense& P, double tol, std::size_t max_iter) {
    const Eigen::Index r = P.rows();
    const Eigen::Index n = P.cols();
    if (r < 1 || n < r) {
        throw RankDeficientError(fmt::format("khachiyan_centered_mve: {} points cannot span R^{}", n, r));
    }
    if (!(tol > 0.0)) {
        throw InvalidArgument("khachiyan_centered_mve: tol must be positive");
    }
    {
        const Vector s = singular_values(P);
        if (!(s(0) > 0.0) || s(r - 1) <= 1e-12 * s(0)) {
            throw RankDeficientError(
                fmt::format("khachiyan_centered_mve: points do not span R^{} (sigma_min = {})", r, s(r - 1)));
        }
    }

    const double d = static_cast<double>(r);
    Vector u = Vector::Constant(n, 1.0 / static_cast<double>(n));
    double gap_plus = 0.0;
    double gap_minus = 0.0;
    std::size_t it = 0;
    for (;; ++it) {
        const Vector w = leverages(P, u);
        Eigen::Index jp = 0;
        Eigen::Index jm = -1;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (w(j) > w(jp)) {
                jp = j;
            }
            if (u(j) > 0.0 && (jm < 0 || w(j) < w(jm))) {
                jm = j;
            }
        }
        gap_plus = w(jp) / d - 1.0;
        gap_minus = 1.0 - w(jm) / d;
        if (gap_plus <= tol && gap_minus <= tol) {
            break;
        }
        if (it >= max_iter) {
            throw ConvergenceError(fmt::format("khachiyan_centered_mve: no convergence after {} iterations "
                                               "(dual gap {:.3e})",
                                               it, gap_plus),
                                   it, gap_plus);
        }
        if (gap_plus > gap_minus) {
            const double step = (w(jp) - d) / (d * (w(jp) - 1.0));
            u *= 1.0 - step;
            u(jp) += step;
        } else {
            const double cap = u(jm) / (1.0 - u(jm));
            double step = w(jm) > 1.0 ? (d - w(jm)) / (d * (w(jm) - 1.0)) : cap;
            const bool drop = step >= cap;
            step = std::min(step, cap);
            u *= 1.0 + step;
            u(jm) = drop ? 0.0 : u(jm) - step;
        }
    }

    const Dense S = P * u.asDiagonal() * P.transpose();
    CenteredEllipsoid out;
    out.A = (d * S).inverse();
    out.A = 0.5 * (out.A + out.A.transpose());
    out.weights = u / u.sum();
    out.iterations = it;
    out.dual_gap = (out.A * P).cwiseProduct(P).colwise().sum().maxCoeff() - 1.0;
    return out;
}

MvePreconditioning mve_precondition(const DataMatrix& X, std::size_t r, double tol) {
    if (r < 1 || r > std::min(X.rows(), X.cols())) {
        throw InvalidArgument("mve_precondition: r must lie in [1, min(m, n)]");
    }
    const SvdFactors f = truncated_svd(X, r);
    MvePreconditioning out;
    out.reduced = f.singular_values.asDiagonal() * f.V.transpose();
    out.ellipsoid = khachiyan_centered_mve(out.reduced, tol);
    out.sqrt_A = symmetric_sqrt(out.ellipsoid.A);
    out.preconditioned = out.sqrt_A * out.reduced;
    return out;
}

ExtractionResult mve_spa(const DataMatrix& X, std::size_t r, const TieBreakRule& tb, double tol) {
    const MvePreconditioning pre = mve_precondition(X, r, tol);
    ExtractionResult res = spa(DataMatrix(pre.preconditioned), r, tb);
    res.algorithm = "mve-spa";
    return res;
}

Spa2Trace spa2_trace(const DataMatrix& X, std::size_t r, const TieBreakRule& tb) {
    Spa2Trace t;
    try {
        t.phase1 = spa(X, r, tb);
    } catch (const RankDeficientError& e) {
        throw RankDeficientError(fmt::format("spa2: phase 1 failed: {}", e.what()), e.partial_indices(), "spa2");
    }
    try {
        t.preconditioned = pinv_apply(X.select_cols(t.phase1.indices), X);
    } catch (const RankDeficientError& e) {
        throw RankDeficientError(fmt::format("spa2: {}", e.what()), t.phase1.indices, "spa2");
    }
    t.phase2 = spa(DataMatrix(t.preconditioned), r, tb);
    t.phase2.algorithm = "spa2";
    return t;
}

ExtractionResult spa2(const DataMatrix& X, std::size_t r, const TieBreakRule& tb) {
    return spa2_trace(X, r, tb).phase2;
}

ExtractionResult tlspa2(const DataMatrix& X, std::size_t r, const TieBreakRule& tb, double alpha) {
    const DataMatrix lifted = lift_shift(X, compute_lift_shift(X, r, alpha));
    try {
        ExtractionResult res = spa2(lifted, r, tb);
        res.algorithm = "tlspa2";
        return res;
    } catch (const RankDeficientError& e) {
        throw RankDeficientError(e.what(), e.partial_indices(), "tlspa2");
    }
}

double simplex_volume_sq(const Dense& V) {
    if (V.cols() < 2) {
        throw InvalidArgument("simplex_volume_sq: need at least two vertices");
    }
    const Dense G = V.rightCols(V.cols() - 1).colwise() - V.col(0);
    if (G.cols() > G.rows()) {
        return 0.0;
    }
    Eigen::ColPivHouseholderQR<Dense> qr(G);
    qr.setThreshold(1e-12);
    if (qr.rank() < G.cols()) {
        return 0.0;
    }
    const Vector diag = qr.matrixR().diagonal();
    double vol = 1.0;
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
        vol *= diag(i) * diag(i);
    }
    return vol;
}

ExtractionResult faw(const DataMatrix& X, std::size_t r, const TieBreakRule& tb) {
    ExtractionResult res = tspa(X, r, tb);
    res.algorithm = "faw";
    if (r < 2) {
        return res;
    }
    const std::size_t n = X.cols();
    auto& J = res.indices;
    for (std::size_t pos = 0; pos < r; ++pos) {
        // Volume of J with position pos replaced by p is vol(others) times the
        // squared distance from x_p to the affine hull of the others.
        std::vector<std::size_t> others;
        for (std::size_t i = 0; i < r; ++i) {
            if (i != pos) {
                others.push_back(J[i]);
            }
        }
        const Vector base = X.col(others.front());
        Dense Q(static_cast<Eigen::Index>(X.rows()), static_cast<Eigen::Index>(others.size()));
        Eigen::Index q = 0;
        bool degenerate = false;
        double scale = 0.0;
        for (std::size_t i = 1; i < others.size(); ++i) {
            Vector g = X.col(others[i]) - base;
            scale = std::max(scale, g.norm());
            for (int pass = 0; pass < 2; ++pass) {
                for (Eigen::Index k = 0; k < q; ++k) {
                    g -= Q.col(k).dot(g) * Q.col(k);
                }
            }
            const double gn = g.norm();
            if (!(gn > 1e-12 * scale)) {
                degenerate = true;
                break;
            }
            Q.col(q++) = g / gn;
        }
        if (degenerate) {
            continue;
        }
        auto dist_sq = [&](std::size_t j) {
            Vector g = X.col(j) - base;
            for (int pass = 0; pass < 2; ++pass) {
                for (Eigen::Index k = 0; k < q; ++k) {
                    g -= Q.col(k).dot(g) * Q.col(k);
                }
            }
            return g.squaredNorm();
        };
        std::size_t best = J[pos];
        double best_val = dist_sq(best);
        for (std::size_t p = 0; p < n; ++p) {
            if (std::find(J.begin(), J.end(), p) != J.end()) {
                continue;
            }
            const double val = dist_sq(p);
            if (val > best_val * (1.0 + kTieTolerance)) {
                best = p;
                best_val = val;
            }
        }
        J[pos] = best;
    }
    return res;
}

}  // namespace spakit

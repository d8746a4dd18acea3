#include "spakit/theory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "spakit/error.hpp"
#include "spakit/spa.hpp"
#include "spakit/synthgen.hpp"
#include "spakit/tightness.hpp"

namespace spakit {

namespace {

constexpr std::size_t kMaxListedViolations = 10;
constexpr double kInf = std::numeric_limits<double>::infinity();

Vector random_direction(Rng& rng, Eigen::Index m) {
    Vector d(m);
    do {
        for (Eigen::Index i = 0; i < m; ++i) d(i) = rng.normal();
    } while (d.norm() == 0.0);
    return d / d.norm();
}

Dense gaussian(Rng& rng, Eigen::Index m, Eigen::Index n) {
    Dense G(m, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < m; ++i) G(i, j) = rng.normal();
    return G;
}

double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

std::size_t uniform_count(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng.index(hi - lo + 1); }

// Rank min(m, k), m x k, with a random spectrum shape and overall scale.
// mode 0: plain Gaussian, 1: log-spaced singular values over up to 3
// decades, 2: near-equal column norms.
Dense random_full_rank(Rng& rng, Eigen::Index m, Eigen::Index k, int mode) {
    Dense W = gaussian(rng, m, k);
    const Eigen::Index d = std::min(m, k);
    if (mode == 1 && d > 1) {
        const SvdFactors f = truncated_svd(W, static_cast<std::size_t>(d));
        const double decades = uniform_in(rng, 0.0, 3.0);
        Vector s(d);
        for (Eigen::Index i = 0; i < d; ++i) s(i) = std::pow(10.0, -decades * double(i) / double(d - 1));
        W = f.U * s.asDiagonal() * f.V.transpose();
    } else if (mode == 2) {
        for (Eigen::Index j = 0; j < k; ++j) W.col(j) *= (1.0 + 0.01 * rng.uniform()) / W.col(j).norm();
    }
    return W * std::pow(10.0, uniform_in(rng, -1.0, 1.0));
}

// Separable column-stochastic r x n: identity block (when `pure` says so)
// plus Dirichlet and middle-point columns, columns shuffled.
Dense random_stochastic_h(Rng& rng, Eigen::Index r, const std::vector<bool>& pure) {
    std::vector<Vector> cols;
    for (Eigen::Index i = 0; i < r; ++i) {
        if (!pure[static_cast<std::size_t>(i)]) continue;
        cols.push_back(Vector::Unit(r, i));
    }
    const std::size_t extra = uniform_count(rng, 3, 15);
    for (std::size_t t = 0; t < extra; ++t) {
        Vector h = Vector::Zero(r);
        if (r >= 2 && rng.uniform() < 0.4) {
            const auto a = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(r)));
            auto b = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(r - 1)));
            if (b >= a) ++b;
            h(a) = 0.5;
            h(b) = 0.5;
        } else {
            const double shape = rng.uniform() < 0.5 ? 0.3 : 1.0;
            for (Eigen::Index i = 0; i < r; ++i) h(i) = rng.gamma(shape);
            if (h.sum() == 0.0) h(0) = 1.0;
            h /= h.sum();
        }
        cols.push_back(h);
    }
    const std::vector<std::size_t> perm = rng.permutation(cols.size());
    Dense H(r, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) H.col(static_cast<Eigen::Index>(perm[j])) = cols[j];
    return H;
}

// Columns of norm strictly below eps; some random, some pushed radially
// outward along the clean column.
Dense random_noise(Rng& rng, const Dense& X0, double eps) {
    Dense N(X0.rows(), X0.cols());
    for (Eigen::Index j = 0; j < X0.cols(); ++j) {
        const double nx = X0.col(j).norm();
        if (rng.uniform() < 0.5 && nx > 0.0) {
            N.col(j) = X0.col(j) / nx * eps * (0.999 + 0.000999 * rng.uniform());
        } else {
            N.col(j) = random_direction(rng, X0.rows()) * eps * rng.uniform();
        }
    }
    return N;
}

Dense random_q(Rng& rng, Eigen::Index m, Eigen::Index q, double max_norm) {
    Dense Q(m, q);
    for (Eigen::Index j = 0; j < q; ++j) Q.col(j) = random_direction(rng, m) * max_norm * (1.0 - rng.uniform());
    return Q;
}

Dense stack(const Dense& W, const Dense& Q) {
    Dense B(W.rows(), W.cols() + Q.cols());
    B << W, Q;
    return B;
}

Dense clean_x(const Dense& W, const Dense& Q, const Dense& H) { return stack(W, Q) * H; }

template <class Sample>
TheoryReport run_suite(const std::string& name, int tag, std::size_t samples, std::uint64_t seed, Sample&& sample) {
    if (samples == 0) throw InvalidArgument("theory check: samples must be positive");
    TheoryReport rep;
    rep.name = name;
    rep.samples = samples;
    for (std::size_t i = 0; i < samples; ++i) {
        Rng rng(derive_seed(seed, tag, i, 0));
        const PropertyOutcome o = sample(rng, i);
        rep.worst_ratio = std::max(rep.worst_ratio, o.ratio);
        if (!o.holds) {
            ++rep.violations;
            if (rep.violating_samples.size() < kMaxListedViolations) rep.violating_samples.push_back(i);
        }
    }
    rep.pass = rep.violations == 0;
    return rep;
}

}  // namespace

double thm32_beta(double c) {
    const double gamma = 66.0 * (33.0 * c + 2.0) / ((1.0 - c) * (1.0 - c));
    return 4.0 / (0.5 - c * gamma);
}

double thm41_error_factor() { return 67.0 * 4.0 / (2.0 - std::sqrt(2.0)); }

PropertyOutcome median_lemma_property(const Dense& W) {
    if (W.cols() < 2 || W.cols() > W.rows()) throw InvalidArgument("median lemma: need 2 <= r <= m");
    const ConditioningReport c = conditioning(W, "W");
    const double eps = c.sigma_min / c.kappa / 8.0;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < W.cols(); ++i) {
        for (Eigen::Index j = i + 1; j < W.cols(); ++j) {
            const double mid = (0.5 * (W.col(i) + W.col(j))).norm();
            const double bound = std::max(W.col(i).norm(), W.col(j).norm()) - 2.0 * eps;
            worst = std::max(worst, bound > 0.0 ? mid / bound : kInf);
        }
    }
    return {worst, worst <= 1.0};
}

PropertyOutcome thm31_property(const Dense& W, const Dense& Q, const Dense& H, const Dense& N, double eps) {
    const Dense X = clean_x(W, Q, H) + N;
    const std::size_t p = spa(DataMatrix(X), 1).indices.front();
    const ConditioningReport c = conditioning(W, "W");
    const double bound = kThm31ErrorFactor * c.kappa * eps;
    const Vector x = X.col(static_cast<Eigen::Index>(p));
    double best = kInf, best_any = kInf;
    for (Eigen::Index i = 0; i < W.cols(); ++i) {
        const double ratio = (x - W.col(i)).norm() / bound;
        best_any = std::min(best_any, ratio);
        if (H(i, static_cast<Eigen::Index>(p)) >= 0.5) best = std::min(best, ratio);
    }
    if (best == kInf) return {best_any, false};
    return {best, best <= 1.0};
}

PropertyOutcome thm32_property(const Dense& W, const Dense& Q, const Dense& H, const Dense& N, double eps) {
    if (W.cols() != 2) throw InvalidArgument("rank-two check needs W with two columns");
    const Dense X = clean_x(W, Q, H) + N;
    ExtractionResult res;
    try {
        res = spa(DataMatrix(X), 2);
    } catch (const RankDeficientError&) {
        return {kInf, false};
    }
    const ConditioningReport c = conditioning(W, "W");
    const double b1 = kThm31ErrorFactor * c.kappa * eps;
    const double b2 = (1.0 + thm32_beta(1.0 / kThm32NoiseDivisor)) * c.kappa * eps;
    const Vector x1 = X.col(static_cast<Eigen::Index>(res.indices[0]));
    const Vector x2 = X.col(static_cast<Eigen::Index>(res.indices[1]));
    double best = kInf;
    for (Eigen::Index a = 0; a < 2; ++a) {
        const double r1 = (x1 - W.col(a)).norm() / b1;
        const double r2 = (x2 - W.col(1 - a)).norm() / b2;
        best = std::min(best, std::max(r1, r2));
    }
    return {best, best <= 1.0};
}

PropertyOutcome thm41_property(const Dense& W, const Dense& H, const Dense& N, double eps) {
    if (W.cols() < 2) throw InvalidArgument("two-step check needs r >= 2");
    const Dense X = W * H + N;
    ExtractionResult res;
    try {
        res = tspa(DataMatrix(X), 2);
    } catch (const RankDeficientError&) {
        return {kInf, false};
    }
    const ConditioningReport c = conditioning(W, "W");
    const double bound = thm41_error_factor() * c.kappa * eps;
    const Vector x1 = X.col(static_cast<Eigen::Index>(res.indices[0]));
    const Vector x2 = X.col(static_cast<Eigen::Index>(res.indices[1]));
    double best = kInf;
    for (Eigen::Index i = 0; i < W.cols(); ++i) {
        for (Eigen::Index j = 0; j < W.cols(); ++j) {
            if (i == j) continue;
            best = std::min(best, std::max((x1 - W.col(i)).norm(), (x2 - W.col(j)).norm()) / bound);
        }
    }
    return {best, best <= 1.0};
}

PropertyOutcome translated_sv_property(const Dense& W, const Vector& lambda) {
    const Eigen::Index r = W.cols();
    if (r < 2 || r > W.rows() || lambda.size() != r) throw InvalidArgument("translated sv: need 2 <= r <= m and |lambda| = r");
    if ((lambda.array() < 0.0).any() || std::abs(lambda.sum() - 1.0) > 1e-12 || lambda(r - 1) < 0.5)
        throw InvalidArgument("translated sv: lambda must be stochastic with last weight >= 1/2");
    const Vector v = W * lambda;
    const Dense What = (W.colwise() - v).leftCols(r - 1);
    const Vector sw = singular_values(W);
    const Vector sh = singular_values(What);
    const double factor = 2.0 / (2.0 - std::sqrt(2.0));
    const double r1 = sh(r - 2) > 0.0 ? sw(r - 1) / (factor * sh(r - 2)) : kInf;
    const double r2 = What.colwise().norm().maxCoeff() / (2.0 * W.colwise().norm().maxCoeff());
    const double ratio = std::max(r1, r2);
    return {ratio, ratio <= 1.0};
}

TheoryReport check_median_lemma(std::size_t samples, std::uint64_t seed) {
    return run_suite("median-lemma", 1, samples, seed, [](Rng& rng, std::size_t i) {
        const auto r = static_cast<Eigen::Index>(uniform_count(rng, 2, 6));
        const auto m = r + static_cast<Eigen::Index>(uniform_count(rng, 0, 4));
        return median_lemma_property(random_full_rank(rng, m, r, static_cast<int>(i % 3)));
    });
}

TheoryReport check_lift_cond(std::size_t samples, std::uint64_t seed) {
    return run_suite("lift-cond", 2, samples, seed, [](Rng& rng, std::size_t i) {
        const auto r = static_cast<Eigen::Index>(uniform_count(rng, 2, 7));
        const auto m = r - 1 + static_cast<Eigen::Index>(uniform_count(rng, 0, 3));
        Dense Wt = random_full_rank(rng, m, r, static_cast<int>(i % 2));
        Wt = Wt.colwise() - Wt.rowwise().mean();
        const Vector s = singular_values(Wt);
        const double rt = std::sqrt(double(r));
        const double lo = s(r - 2) / rt, hi = s(0) / rt;
        double c;
        switch (i % 3) {
            case 0: c = hi * uniform_in(rng, 1.0, 5.0); break;
            case 1: c = uniform_in(rng, lo, hi); break;
            default: c = lo * uniform_in(rng, 0.05, 1.0); break;
        }
        const auto [formula, direct] = check_lift_conditioning(DataMatrix(Wt), c);
        const double ratio = std::abs(formula - direct) / (1e-9 * direct);
        return PropertyOutcome{ratio, ratio <= 1.0};
    });
}

TheoryReport check_thm31(std::size_t samples, std::uint64_t seed) {
    return run_suite("thm31", 3, samples, seed, [](Rng& rng, std::size_t i) {
        const auto k = static_cast<Eigen::Index>(uniform_count(rng, 1, 4));
        const auto q = static_cast<Eigen::Index>(uniform_count(rng, 0, 3));
        const auto m = k + static_cast<Eigen::Index>(uniform_count(rng, 0, 3));
        const Dense W = random_full_rank(rng, m, k, static_cast<int>(i % 3));
        const ConditioningReport c = conditioning(W, "W");
        const double eps = c.sigma_min / c.kappa / kThm31NoiseDivisor * (1.0 - rng.uniform());
        const Dense Q = random_q(rng, m, q, c.col_norm_max / 2.0);
        const Dense H = random_stochastic_h(rng, k + q, std::vector<bool>(static_cast<std::size_t>(k + q), true));
        const Dense N = random_noise(rng, clean_x(W, Q, H), eps);
        return thm31_property(W, Q, H, N, eps);
    });
}

TheoryReport check_thm32(std::size_t samples, std::uint64_t seed) {
    return run_suite("thm32", 4, samples, seed, [](Rng& rng, std::size_t i) {
        const auto q = static_cast<Eigen::Index>(uniform_count(rng, 0, 3));
        const auto m = static_cast<Eigen::Index>(uniform_count(rng, 2, 5));
        const Dense W = random_full_rank(rng, m, 2, static_cast<int>(i % 3));
        const ConditioningReport c = conditioning(W, "W");
        const double eps = c.sigma_min / c.kappa / kThm32NoiseDivisor * (1.0 - rng.uniform());
        const Dense Q = random_q(rng, m, q, c.sigma_min / 2.0);
        std::vector<bool> pure(static_cast<std::size_t>(2 + q), true);
        for (std::size_t t = 2; t < pure.size(); ++t) pure[t] = rng.uniform() < 0.5;
        const Dense H = random_stochastic_h(rng, 2 + q, pure);
        const Dense N = random_noise(rng, clean_x(W, Q, H), eps);
        return thm32_property(W, Q, H, N, eps);
    });
}

TheoryReport check_thm41(std::size_t samples, std::uint64_t seed) {
    return run_suite("thm41", 5, samples, seed, [](Rng& rng, std::size_t i) {
        const auto r = static_cast<Eigen::Index>(uniform_count(rng, 2, 5));
        const auto m = r + static_cast<Eigen::Index>(uniform_count(rng, 0, 3));
        const Dense W = random_full_rank(rng, m, r, static_cast<int>(i % 3));
        const ConditioningReport c = conditioning(W, "W");
        const double eps = c.sigma_min / c.kappa / kThm41NoiseDivisor * (1.0 - rng.uniform());
        const Dense H = random_stochastic_h(rng, r, std::vector<bool>(static_cast<std::size_t>(r), true));
        const Dense N = random_noise(rng, W * H, eps);
        return thm41_property(W, H, N, eps);
    });
}

TheoryReport check_translated_sv(std::size_t samples, std::uint64_t seed) {
    return run_suite("translated-sv", 6, samples, seed, [](Rng& rng, std::size_t i) {
        const auto r = static_cast<Eigen::Index>(uniform_count(rng, 2, 6));
        const auto m = r + static_cast<Eigen::Index>(uniform_count(rng, 0, 3));
        const Dense W = random_full_rank(rng, m, r, static_cast<int>(i % 3));
        Vector lambda(r);
        const double last = i % 4 == 0 ? 0.5 : uniform_in(rng, 0.5, 1.0);
        for (Eigen::Index t = 0; t < r - 1; ++t) lambda(t) = rng.gamma(1.0);
        const double rest = lambda.head(r - 1).sum();
        if (rest > 0.0) {
            lambda.head(r - 1) *= (1.0 - last) / rest;
        } else {
            lambda.head(r - 1).setConstant((1.0 - last) / double(r - 1));
        }
        lambda(r - 1) = last;
        return translated_sv_property(W, lambda);
    });
}

std::span<const char* const> theory_check_names() {
    static constexpr std::array<const char*, 6> names = {"median-lemma", "lift-cond", "thm31",
                                                         "thm32",        "thm41",     "translated-sv"};
    return names;
}

TheoryReport run_theory_check(const std::string& name, std::size_t samples, std::uint64_t seed) {
    if (samples == 0) throw InvalidArgument("theory check: samples must be positive");
    if (name == "median-lemma") return check_median_lemma(samples, seed);
    if (name == "lift-cond") return check_lift_cond(samples, seed);
    if (name == "thm31") return check_thm31(samples, seed);
    if (name == "thm32") return check_thm32(samples, seed);
    if (name == "thm41") return check_thm41(samples, seed);
    if (name == "translated-sv") return check_translated_sv(samples, seed);
    throw InvalidArgument(fmt::format("unknown theory check '{}'", name));
}

}  // namespace spakit

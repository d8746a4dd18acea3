#include "spakit/spa.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <fmt/format.h>

#include "spakit/error.hpp"

namespace spakit {

namespace {

// Columns y_j = (x_j - shift ; lift) of a DataMatrix, evaluated lazily.
class ColumnView {
public:
    explicit ColumnView(const DataMatrix& X) : X_(X), m_(static_cast<Eigen::Index>(X.rows())) {}

    void set_shift(Vector v) { shift_ = std::move(v); }
    void set_lift(double c) { lift_ = c; }

    Eigen::Index dim() const { return m_ + (lift_ ? 1 : 0); }
    std::size_t cols() const { return X_.cols(); }

    Vector column(std::size_t j) const {
        Vector y(dim());
        y.head(m_) = X_.col(j);
        if (shift_) {
            y.head(m_) -= *shift_;
        }
        if (lift_) {
            y(m_) = *lift_;
        }
        return y;
    }

    Vector sq_norms() const {
        const auto n = static_cast<Eigen::Index>(X_.cols());
        Vector s(n);
        if (!X_.is_sparse()) {
            const Dense& D = X_.dense();
            for (Eigen::Index j = 0; j < n; ++j) {
                s(j) = shift_ ? (D.col(j) - *shift_).squaredNorm() : D.col(j).squaredNorm();
            }
        } else {
            for (Eigen::Index j = 0; j < n; ++j) {
                s(j) = X_.col_sq_norm(static_cast<std::size_t>(j));
            }
            if (shift_) {
                const Vector xv = X_.transpose_times(*shift_);
                s.array() += shift_->squaredNorm() - 2.0 * xv.array();
                s = s.cwiseMax(0.0);
            }
        }
        if (lift_) {
            s.array() += *lift_ * *lift_;
        }
        return s;
    }

    // u^T y_j for every column.
    Vector dots(const Vector& u) const {
        const Vector top = u.head(m_);
        Vector d = X_.transpose_times(top);
        if (shift_) {
            d.array() -= top.dot(*shift_);
        }
        if (lift_) {
            d.array() += *lift_ * u(m_);
        }
        return d;
    }

private:
    const DataMatrix& X_;
    Eigen::Index m_;
    std::optional<Vector> shift_;
    std::optional<double> lift_;
};

std::size_t select_column(const Vector& sq, const std::vector<char>& taken, const TieBreakRule& tb,
                          std::size_t step) {
    double best = -1.0;
    for (Eigen::Index j = 0; j < sq.size(); ++j) {
        if (!taken[static_cast<std::size_t>(j)]) {
            best = std::max(best, std::sqrt(std::max(sq(j), 0.0)));
        }
    }
    std::vector<std::size_t> candidates;
    const double floor = best * (1.0 - kTieTolerance);
    for (Eigen::Index j = 0; j < sq.size(); ++j) {
        if (!taken[static_cast<std::size_t>(j)] && std::sqrt(std::max(sq(j), 0.0)) >= floor) {
            candidates.push_back(static_cast<std::size_t>(j));
        }
    }
    return tb.pick(step, candidates);
}

// Removes the components along the first k basis columns; modified
// Gram-Schmidt with one reorthogonalization pass.
Vector orthogonalize(Vector y, const Dense& U, Eigen::Index k) {
    for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index i = 0; i < k; ++i) {
            y -= U.col(i).dot(y) * U.col(i);
        }
    }
    return y;
}

[[noreturn]] void throw_rank_deficient(const ExtractionResult& partial, std::size_t r) {
    throw RankDeficientError(fmt::format("{}: rank-deficient data, extracted {} of {} indices",
                                         partial.algorithm, partial.indices.size(), r),
                             partial.indices, partial.algorithm);
}

ExtractionResult run_projection(ColumnView& view, std::size_t r, const TieBreakRule& tb, bool translate_first,
                                std::string tag) {
    const std::size_t n = view.cols();
    ExtractionResult out;
    out.algorithm = std::move(tag);

    Vector sq = view.sq_norms();
    const double K = std::sqrt(sq.maxCoeff());
    std::vector<char> taken(n, 0);
    Dense U(view.dim(), static_cast<Eigen::Index>(r));
    Eigen::Index k = 0;

    for (std::size_t step = 0; step < r; ++step) {
        std::size_t p = select_column(sq, taken, tb, step);

        if (step == 0 && translate_first) {
            out.indices.push_back(p);
            out.step_norms.push_back(std::sqrt(sq(static_cast<Eigen::Index>(p))));
            taken[p] = 1;
            view.set_shift(view.column(p));
            sq = view.sq_norms();
            continue;
        }

        Vector res = orthogonalize(view.column(p), U, k);
        double rn = res.norm();
        const double tracked = sq(static_cast<Eigen::Index>(p));
        // The running squared norms lose relative accuracy once residuals are
        // small against the original columns; recompute them exactly then.
        const bool drifted = std::abs(rn * rn - tracked) > 1e-6 * std::max(rn * rn, tracked);
        if (drifted || rn <= kRankTolerance * K) {
            for (std::size_t j = 0; j < n; ++j) {
                if (!taken[j]) {
                    sq(static_cast<Eigen::Index>(j)) = orthogonalize(view.column(j), U, k).squaredNorm();
                }
            }
            p = select_column(sq, taken, tb, step);
            res = orthogonalize(view.column(p), U, k);
            rn = res.norm();
        }
        if (!(rn > kRankTolerance * K)) {
            throw_rank_deficient(out, r);
        }

        U.col(k++) = res / rn;
        taken[p] = 1;
        out.indices.push_back(p);
        out.step_norms.push_back(rn);

        if (step + 1 < r) {
            const Vector d = view.dots(U.col(k - 1));
            sq.array() -= d.array().square();
            sq = sq.cwiseMax(0.0);
        }
    }
    return out;
}

void check_count(const DataMatrix& X, std::size_t r, const char* name) {
    if (r < 1 || r > X.cols()) {
        throw InvalidArgument(fmt::format("{}: r must lie in [1, n] (r = {}, n = {})", name, r, X.cols()));
    }
}

}  // namespace

TieBreakRule TieBreakRule::prefer(std::size_t step, std::size_t target) {
    return adversarial([step, target](std::size_t s, std::span<const std::size_t> cands) {
        if (s == step && std::find(cands.begin(), cands.end(), target) != cands.end()) {
            return target;
        }
        return cands.front();
    });
}

std::size_t TieBreakRule::pick(std::size_t step, std::span<const std::size_t> candidates) const {
    if (candidates.empty()) {
        throw InvalidArgument("tie-break called without candidates");
    }
    switch (mode) {
        case TieBreakMode::lowest_index:
            return candidates.front();
        case TieBreakMode::highest_index:
            return candidates.back();
        case TieBreakMode::adversarial_callback: {
            if (!choose) {
                throw InvalidArgument("adversarial tie-break without a callback");
            }
            const std::size_t c = choose(step, candidates);
            if (std::find(candidates.begin(), candidates.end(), c) == candidates.end()) {
                throw InvalidArgument("tie-break callback returned a non-candidate index");
            }
            return c;
        }
    }
    return candidates.front();
}

ExtractionResult spa(const DataMatrix& X, std::size_t r, const TieBreakRule& tb) {
    check_count(X, r, "spa");
    ColumnView view(X);
    return run_projection(view, r, tb, false, "spa");
}

ExtractionResult spa_naive(const DataMatrix& X, std::size_t r, const TieBreakRule& tb) {
    check_count(X, r, "spa_naive");
    Dense R = X.to_dense();
    const auto n = R.cols();
    const double K = R.colwise().norm().maxCoeff();
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    ExtractionResult out;
    out.algorithm = "spa_naive";
    for (std::size_t step = 0; step < r; ++step) {
        const Vector sq = R.colwise().squaredNorm().transpose();
        const std::size_t p = select_column(sq, taken, tb, step);
        const Vector rp = R.col(static_cast<Eigen::Index>(p));
        const double rn = rp.norm();
        if (!(rn > kRankTolerance * K)) {
            throw_rank_deficient(out, r);
        }
        R -= rp * (rp.transpose() * R) / (rn * rn);
        taken[p] = 1;
        out.indices.push_back(p);
        out.step_norms.push_back(rn);
    }
    return out;
}

ExtractionResult tspa(const DataMatrix& X, std::size_t r, const TieBreakRule& tb) {
    check_count(X, r, "tspa");
    ColumnView view(X);
    return run_projection(view, r, tb, true, "tspa");
}

LiftShiftParams compute_lift_shift(const DataMatrix& X, std::size_t r, double alpha) {
    if (r < 1) {
        throw InvalidArgument("compute_lift_shift: r must be >= 1");
    }
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw InvalidArgument("compute_lift_shift: alpha must be positive");
    }
    const auto n = static_cast<double>(X.cols());
    LiftShiftParams p;
    if (X.is_sparse()) {
        p.v = Vector(X.sparse() * Vector::Ones(X.sparse().cols())) / n;
    } else {
        p.v = X.dense().rowwise().sum() / n;
    }
    ColumnView centered(X);
    centered.set_shift(p.v);
    const Vector sq = centered.sq_norms();
    const double min_dist = std::sqrt(sq.minCoeff());
    const double frob = std::sqrt(sq.sum());
    const double c = 0.5 * (min_dist / std::sqrt(static_cast<double>(r)) + frob / std::sqrt(n));
    const double K = column_norms(X).maxCoeff();
    if (!(c > 1e-14 * K) || c == 0.0) {
        throw InvalidArgument("compute_lift_shift: all columns coincide with their mean, lift height is zero");
    }
    p.c = alpha * c;
    return p;
}

DataMatrix lift_shift(const DataMatrix& X, const LiftShiftParams& p) {
    const auto m = static_cast<Eigen::Index>(X.rows());
    if (p.v.size() != m) {
        throw InvalidArgument("lift_shift: translation length must equal the row count");
    }
    if (!(p.c > 0.0)) {
        throw InvalidArgument("lift_shift: c must be positive");
    }
    Dense out(m + 1, static_cast<Eigen::Index>(X.cols()));
    out.topRows(m) = X.to_dense().colwise() - p.v;
    out.row(m).setConstant(p.c);
    return DataMatrix(std::move(out));
}

ExtractionResult spa_lifted(const DataMatrix& X, const LiftShiftParams& p, std::size_t r, const TieBreakRule& tb) {
    check_count(X, r, "tlspa");
    if (p.v.size() != static_cast<Eigen::Index>(X.rows()) || !(p.c > 0.0)) {
        throw InvalidArgument("spa_lifted: invalid lift parameters");
    }
    ColumnView view(X);
    view.set_shift(p.v);
    view.set_lift(p.c);
    return run_projection(view, r, tb, false, "tlspa");
}

ExtractionResult tlspa(const DataMatrix& X, std::size_t r, const TieBreakRule& tb, double alpha) {
    return spa_lifted(X, compute_lift_shift(X, r, alpha), r, tb);
}

}  // namespace spakit

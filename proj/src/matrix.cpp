#include "spakit/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/QR>

#include "spakit/error.hpp"

namespace spakit {

namespace {

void require_finite(const double* data, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::isfinite(data[i])) {
            throw InvalidArgument("matrix contains a non-finite value");
        }
    }
}

void check_shape(Eigen::Index rows, Eigen::Index cols) {
    if (rows < 1 || cols < 1) {
        throw InvalidArgument("matrix must have at least one row and one column");
    }
}

// Kuhn augmenting path restricted to edges with dist <= limit.
bool augment(std::size_t k, const Dense& dist, double limit, std::vector<char>& seen,
             std::vector<std::ptrdiff_t>& owner) {
    const auto r = static_cast<std::size_t>(dist.cols());
    for (std::size_t j = 0; j < r; ++j) {
        if (seen[j] || dist(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) > limit) {
            continue;
        }
        seen[j] = 1;
        if (owner[j] < 0 || augment(static_cast<std::size_t>(owner[j]), dist, limit, seen, owner)) {
            owner[j] = static_cast<std::ptrdiff_t>(k);
            return true;
        }
    }
    return false;
}

std::optional<std::vector<std::size_t>> perfect_matching(const Dense& dist, double limit) {
    const auto r = static_cast<std::size_t>(dist.rows());
    std::vector<std::ptrdiff_t> owner(r, -1);
    for (std::size_t k = 0; k < r; ++k) {
        std::vector<char> seen(r, 0);
        if (!augment(k, dist, limit, seen, owner)) {
            return std::nullopt;
        }
    }
    std::vector<std::size_t> assignment(r);
    for (std::size_t j = 0; j < r; ++j) {
        assignment[static_cast<std::size_t>(owner[j])] = j;
    }
    return assignment;
}

// Completes the zero columns of an orthonormal-column matrix from the
// canonical basis (classical Gram-Schmidt, two passes).
void complete_basis(Dense& Q, std::vector<bool> filled) {
    const Eigen::Index m = Q.rows();
    Eigen::Index candidate = 0;
    for (Eigen::Index j = 0; j < Q.cols(); ++j) {
        if (filled[static_cast<std::size_t>(j)]) {
            continue;
        }
        while (candidate < m) {
            Vector e = Vector::Unit(m, candidate++);
            for (int pass = 0; pass < 2; ++pass) {
                for (Eigen::Index i = 0; i < Q.cols(); ++i) {
                    if (filled[static_cast<std::size_t>(i)]) {
                        e -= Q.col(i).dot(e) * Q.col(i);
                    }
                }
            }
            const double nrm = e.norm();
            if (nrm > 1e-8) {
                Q.col(j) = e / nrm;
                filled[static_cast<std::size_t>(j)] = true;
                break;
            }
        }
    }
}

// One-sided Jacobi on a tall matrix (rows >= cols). Returns A = U diag(s) V^T
// with all cols() triplets, sorted.
SvdFactors jacobi_tall(Dense A, double tol) {
    const Eigen::Index n = A.cols();
    Dense V = Dense::Identity(n, n);
    const std::size_t cap = 100 * static_cast<std::size_t>(std::max<Eigen::Index>(n, 1));
    bool converged = false;
    std::size_t sweep = 0;
    double worst = 0.0;
    for (; sweep < cap && !converged; ++sweep) {
        converged = true;
        worst = 0.0;
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double alpha = A.col(p).squaredNorm();
                const double beta = A.col(q).squaredNorm();
                const double gamma = A.col(p).dot(A.col(q));
                if (gamma == 0.0 || alpha == 0.0 || beta == 0.0) {
                    continue;
                }
                const double off = std::abs(gamma) / std::sqrt(alpha * beta);
                if (off <= tol) {
                    continue;
                }
                worst = std::max(worst, off);
                converged = false;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (auto* M : {&A, &V}) {
                    Vector cp = M->col(p);
                    M->col(p) = c * cp - s * M->col(q);
                    M->col(q) = s * cp + c * M->col(q);
                }
            }
        }
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "Jacobi SVD did not converge after " << sweep << " sweeps (off-diagonal " << worst << ")";
        throw ConvergenceError(msg.str(), sweep, worst);
    }

    Vector sigma(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        sigma(j) = A.col(j).norm();
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return sigma(a) > sigma(b); });

    SvdFactors out;
    out.U = Dense::Zero(A.rows(), n);
    out.V = Dense(n, n);
    out.singular_values = Vector(n);
    std::vector<bool> filled(static_cast<std::size_t>(n), false);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index src = order[static_cast<std::size_t>(j)];
        out.singular_values(j) = sigma(src);
        out.V.col(j) = V.col(src);
        if (sigma(src) > 0.0) {
            out.U.col(j) = A.col(src) / sigma(src);
            filled[static_cast<std::size_t>(j)] = true;
        }
    }
    complete_basis(out.U, std::move(filled));
    return out;
}

}  // namespace

DataMatrix::DataMatrix(Dense values) : storage_(std::move(values)) {
    const auto& d = std::get<Dense>(storage_);
    check_shape(d.rows(), d.cols());
    require_finite(d.data(), static_cast<std::size_t>(d.size()));
}

DataMatrix::DataMatrix(Sparse values) : storage_(std::move(values)) {
    auto& s = std::get<Sparse>(storage_);
    check_shape(s.rows(), s.cols());
    s.makeCompressed();
    require_finite(s.valuePtr(), static_cast<std::size_t>(s.nonZeros()));
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
        const auto begin = s.outerIndexPtr()[j];
        const auto end = s.outerIndexPtr()[j + 1];
        for (auto k = begin + 1; k < end; ++k) {
            if (s.innerIndexPtr()[k] <= s.innerIndexPtr()[k - 1]) {
                throw InvalidArgument("sparse row indices must be strictly increasing within a column");
            }
        }
    }
}

DataMatrix DataMatrix::from_csc(std::size_t rows, std::size_t cols, std::span<const std::size_t> col_ptr,
                                std::span<const std::size_t> row_idx, std::span<const double> values) {
    check_shape(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    if (col_ptr.size() != cols + 1 || col_ptr.front() != 0 || col_ptr.back() != row_idx.size() ||
        row_idx.size() != values.size()) {
        throw InvalidArgument("inconsistent CSC array lengths");
    }
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(values.size());
    for (std::size_t j = 0; j < cols; ++j) {
        if (col_ptr[j + 1] < col_ptr[j]) {
            throw InvalidArgument("CSC column pointers must be nondecreasing");
        }
        for (std::size_t k = col_ptr[j]; k < col_ptr[j + 1]; ++k) {
            if (row_idx[k] >= rows) {
                throw InvalidArgument("CSC row index out of range");
            }
            if (k > col_ptr[j] && row_idx[k] <= row_idx[k - 1]) {
                throw InvalidArgument("sparse row indices must be strictly increasing within a column");
            }
            triplets.emplace_back(static_cast<int>(row_idx[k]), static_cast<int>(j), values[k]);
        }
    }
    Sparse s(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    s.setFromTriplets(triplets.begin(), triplets.end());
    return DataMatrix(std::move(s));
}

std::size_t DataMatrix::rows() const noexcept {
    return std::visit([](const auto& m) { return static_cast<std::size_t>(m.rows()); }, storage_);
}

std::size_t DataMatrix::cols() const noexcept {
    return std::visit([](const auto& m) { return static_cast<std::size_t>(m.cols()); }, storage_);
}

std::size_t DataMatrix::nnz() const noexcept {
    if (is_sparse()) {
        return static_cast<std::size_t>(std::get<Sparse>(storage_).nonZeros());
    }
    return rows() * cols();
}

const Dense& DataMatrix::dense() const {
    if (is_sparse()) {
        throw InvalidArgument("matrix is stored sparse");
    }
    return std::get<Dense>(storage_);
}

const Sparse& DataMatrix::sparse() const {
    if (!is_sparse()) {
        throw InvalidArgument("matrix is stored dense");
    }
    return std::get<Sparse>(storage_);
}

Dense DataMatrix::to_dense() const {
    if (is_sparse()) {
        return Dense(std::get<Sparse>(storage_));
    }
    return std::get<Dense>(storage_);
}

Vector DataMatrix::col(std::size_t j) const {
    const auto jj = static_cast<Eigen::Index>(j);
    if (is_sparse()) {
        return Vector(std::get<Sparse>(storage_).col(jj));
    }
    return std::get<Dense>(storage_).col(jj);
}

double DataMatrix::col_sq_norm(std::size_t j) const {
    const auto jj = static_cast<Eigen::Index>(j);
    if (is_sparse()) {
        return std::get<Sparse>(storage_).col(jj).squaredNorm();
    }
    return std::get<Dense>(storage_).col(jj).squaredNorm();
}

Vector DataMatrix::transpose_times(const Vector& u) const {
    if (is_sparse()) {
        return std::get<Sparse>(storage_).transpose() * u;
    }
    return std::get<Dense>(storage_).transpose() * u;
}

DataMatrix DataMatrix::select_cols(std::span<const std::size_t> idx) const {
    if (idx.empty()) {
        throw InvalidArgument("select_cols needs at least one index");
    }
    for (auto j : idx) {
        if (j >= cols()) {
            throw InvalidArgument("column index out of range");
        }
    }
    if (is_sparse()) {
        const auto& s = std::get<Sparse>(storage_);
        Sparse out(s.rows(), static_cast<Eigen::Index>(idx.size()));
        std::vector<Eigen::Triplet<double>> triplets;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            for (Sparse::InnerIterator it(s, static_cast<Eigen::Index>(idx[k])); it; ++it) {
                triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(k), it.value());
            }
        }
        out.setFromTriplets(triplets.begin(), triplets.end());
        return DataMatrix(std::move(out));
    }
    const auto& d = std::get<Dense>(storage_);
    Dense out(d.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
        out.col(static_cast<Eigen::Index>(k)) = d.col(static_cast<Eigen::Index>(idx[k]));
    }
    return DataMatrix(std::move(out));
}

Vector column_norms(const DataMatrix& X) {
    Vector out(static_cast<Eigen::Index>(X.cols()));
    for (std::size_t j = 0; j < X.cols(); ++j) {
        out(static_cast<Eigen::Index>(j)) = std::sqrt(X.col_sq_norm(j));
    }
    return out;
}

SvdFactors truncated_svd(const Dense& X, std::size_t k, double tol) {
    const auto m = static_cast<std::size_t>(X.rows());
    const auto n = static_cast<std::size_t>(X.cols());
    if (k < 1 || k > std::min(m, n)) {
        throw InvalidArgument("truncated_svd: k must lie in [1, min(m, n)]");
    }
    if (!(tol > 0.0)) {
        throw InvalidArgument("truncated_svd: tol must be positive");
    }
    SvdFactors full;
    if (m >= n) {
        full = jacobi_tall(X, tol);
    } else {
        SvdFactors t = jacobi_tall(X.transpose(), tol);
        full.U = std::move(t.V);
        full.V = std::move(t.U);
        full.singular_values = std::move(t.singular_values);
    }
    const auto kk = static_cast<Eigen::Index>(k);
    return SvdFactors{full.U.leftCols(kk), full.singular_values.head(kk), full.V.leftCols(kk)};
}

SvdFactors truncated_svd(const DataMatrix& X, std::size_t k, double tol) {
    return truncated_svd(X.to_dense(), k, tol);
}

Vector singular_values(const Dense& X) {
    const auto k = static_cast<std::size_t>(std::min(X.rows(), X.cols()));
    return truncated_svd(X, k).singular_values;
}

Dense pinv_apply(const DataMatrix& B, const DataMatrix& X) {
    if (B.rows() != X.rows()) {
        throw InvalidArgument("pinv_apply: B and X must have the same number of rows");
    }
    const std::size_t r = B.cols();
    if (r > B.rows()) {
        throw RankDeficientError("pinv_apply: B has more columns than rows (sigma_min = 0)");
    }
    const SvdFactors f = truncated_svd(B, r);
    const double smax = f.singular_values(0);
    const double smin = f.singular_values(static_cast<Eigen::Index>(r) - 1);
    if (!(smax > 0.0) || smin <= kPinvRankTolerance * smax) {
        std::ostringstream msg;
        msg << "pinv_apply: B is rank deficient (sigma_min = " << smin << ", sigma_max = " << smax << ")";
        throw RankDeficientError(msg.str());
    }
    // The SVD only certifies the rank; the solve goes through Householder QR,
    // which keeps B^+ B = I to working precision.
    const Dense Bd = B.to_dense();
    const Eigen::HouseholderQR<Dense> qr(Bd);
    const auto ri = static_cast<Eigen::Index>(r);
    const Dense Q = qr.householderQ() * Dense::Identity(Bd.rows(), ri);
    Dense QtX;
    if (X.is_sparse()) {
        QtX = (X.sparse().transpose() * Q).transpose();
    } else {
        QtX = Q.transpose() * X.dense();
    }
    return qr.matrixQR().topLeftCorner(ri, ri).triangularView<Eigen::Upper>().solve(QtX);
}

ConditioningReport conditioning(const Dense& W, std::string label, std::optional<std::size_t> sigma_index) {
    ConditioningReport rep;
    rep.label = std::move(label);
    rep.col_norm_max = W.colwise().norm().maxCoeff();
    const auto kmax = static_cast<std::size_t>(std::min(W.rows(), W.cols()));
    const std::size_t k = sigma_index.value_or(kmax);
    if (k < 1) {
        throw InvalidArgument("conditioning: sigma index must be >= 1");
    }
    rep.sigma_min = k > kmax ? 0.0 : singular_values(W)(static_cast<Eigen::Index>(k) - 1);
    if (rep.sigma_min < kSingularKappaTolerance * rep.col_norm_max || rep.sigma_min == 0.0) {
        rep.kappa = std::numeric_limits<double>::infinity();
        rep.rank_deficient = true;
    } else {
        rep.kappa = rep.col_norm_max / rep.sigma_min;
    }
    return rep;
}

ConditioningReport conditioning(const DataMatrix& W, std::string label, std::optional<std::size_t> sigma_index) {
    return conditioning(W.to_dense(), std::move(label), sigma_index);
}

MatchResult match_error(const Dense& Wtrue, const Dense& Xsel) {
    if (Wtrue.rows() != Xsel.rows() || Wtrue.cols() != Xsel.cols()) {
        throw InvalidArgument("match_error: Wtrue and Xsel must have identical shapes");
    }
    const Eigen::Index r = Wtrue.cols();
    Dense dist(r, r);
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(r * r));
    for (Eigen::Index k = 0; k < r; ++k) {
        for (Eigen::Index j = 0; j < r; ++j) {
            dist(k, j) = (Wtrue.col(k) - Xsel.col(j)).norm();
            values.push_back(dist(k, j));
        }
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());

    // The largest value always admits a matching; search the smallest one that does.
    std::size_t lo = 0;
    std::size_t hi = values.size() - 1;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (perfect_matching(dist, values[mid])) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    MatchResult res;
    res.bottleneck_error = values[lo];
    res.assignment = *perfect_matching(dist, values[lo]);
    return res;
}

MatchResult match_error(const DataMatrix& Wtrue, const DataMatrix& Xsel) {
    return match_error(Wtrue.to_dense(), Xsel.to_dense());
}

}  // namespace spakit

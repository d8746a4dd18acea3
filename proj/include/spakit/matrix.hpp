#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace spakit {

using Vector = Eigen::VectorXd;
using Dense = Eigen::MatrixXd;
using Sparse = Eigen::SparseMatrix<double, Eigen::ColMajor>;

// Observation matrix: dense column-major or compressed-by-column sparse.
// Construction rejects empty shapes and non-finite values.
class DataMatrix {
public:
    explicit DataMatrix(Dense values);
    explicit DataMatrix(Sparse values);

    /// Builds a sparse matrix from raw CSC arrays, validating pointer
    /// monotonicity and strictly increasing in-range row indices.
    static DataMatrix from_csc(std::size_t rows, std::size_t cols,
                               std::span<const std::size_t> col_ptr,
                               std::span<const std::size_t> row_idx,
                               std::span<const double> values);

    std::size_t rows() const noexcept;
    std::size_t cols() const noexcept;
    bool is_sparse() const noexcept { return std::holds_alternative<Sparse>(storage_); }
    std::size_t nnz() const noexcept;

    const Dense& dense() const;
    const Sparse& sparse() const;
    Dense to_dense() const;

    Vector col(std::size_t j) const;
    double col_sq_norm(std::size_t j) const;

    /// X^T u without densifying sparse storage.
    Vector transpose_times(const Vector& u) const;

    DataMatrix select_cols(std::span<const std::size_t> idx) const;

private:
    std::variant<Dense, Sparse> storage_;
};

struct SvdFactors {
    Dense U;
    Vector singular_values;  // nonincreasing
    Dense V;
};

struct ConditioningReport {
    double col_norm_max = 0.0;
    double sigma_min = 0.0;
    double kappa = 0.0;
    // Set when sigma_min is numerically zero; kappa then holds +inf. Keeps a
    // genuinely singular matrix distinguishable from a finite overflow.
    bool rank_deficient = false;
    std::string label;
};

struct MatchResult {
    std::vector<std::size_t> assignment;  // truth column k -> selected column assignment[k]
    double bottleneck_error = 0.0;
};

inline constexpr double kSvdTolerance = 1e-12;
inline constexpr double kPinvRankTolerance = 1e-12;
inline constexpr double kSingularKappaTolerance = 1e-14;

Vector column_norms(const DataMatrix& X);

/// Leading-k singular triplets via one-sided Jacobi. Throws ConvergenceError
/// (with the sweep count) when the cap of 100*min(m,n) sweeps is exhausted.
SvdFactors truncated_svd(const DataMatrix& X, std::size_t k, double tol = kSvdTolerance);
SvdFactors truncated_svd(const Dense& X, std::size_t k, double tol = kSvdTolerance);

/// All min(m,n) singular values, nonincreasing.
Vector singular_values(const Dense& X);

/// B^+ X through the SVD of B. Rejects B whose smallest singular value is
/// below 1e-12 * sigma_max (RankDeficientError).
Dense pinv_apply(const DataMatrix& B, const DataMatrix& X);

/// K(W), sigma_k(W) and their ratio. sigma_index defaults to min(m,n); indices
/// beyond min(m,n) read as a zero singular value.
ConditioningReport conditioning(const DataMatrix& W, std::string label,
                                std::optional<std::size_t> sigma_index = std::nullopt);
ConditioningReport conditioning(const Dense& W, std::string label,
                                std::optional<std::size_t> sigma_index = std::nullopt);

/// Bottleneck assignment: min over bijections pi of max_k ||W(:,k) - Xsel(:,pi(k))||.
MatchResult match_error(const DataMatrix& Wtrue, const DataMatrix& Xsel);
MatchResult match_error(const Dense& Wtrue, const Dense& Xsel);

}  // namespace spakit

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kaczmarz/linalg.hpp"

namespace kaczmarz::spectral {

using linalg::DenseMatrix;
using linalg::Vector;

/// Relative cutoff below which an eigenvalue of the Gram matrix counts as zero.
constexpr double kRankThreshold = 1e-10;

/// Eigenvalues of a dense symmetric n x n matrix (row-major), ascending.
/// Cyclic Jacobi rotations; sweep tolerance 1e-13 * |M|_F.
std::vector<double> symmetric_eigenvalues(std::span<const double> m, std::size_t n);

//
// Full symmetric eigendecomposition. vectors is row-major n x n with column
// j holding the eigenvector for values[j].
//
struct SymmetricEigen {
    std::vector<double> values;
    std::vector<double> vectors;
    std::size_t n = 0;
};
SymmetricEigen symmetric_eigendecomposition(std::span<const double> m,
                                            std::size_t n);

//
// All constants entering the convergence-rate estimates of the four solvers.
// coherence_min / coherence_max are the min / max over distinct row pairs of
// the absolute cosine between normalized rows.
//
struct SpectralProfile {
    std::size_t rank = 0;
    double lambda_min_nz = 0.0;   // min nonzero eigenvalue of A^T A
    double fro_sq = 0.0;          // |A|_F^2
    double alpha_f = 0.0;         // max_i (|A|_F^2 - |A_i|^2)
    double upsilon = 0.0;         // sum over ordered pairs of |A_j|^2 |A_i|^2
    double coherence_min = 0.0;
    double coherence_max = 0.0;
    double d_const = 0.0;         // min of t^2(1-t)/(1+t) at t = coherence_min, coherence_max

    /// Some pair of rows is (anti)parallel to machine precision. The constants
    /// are still reported, but the two-row rate bound degenerates.
    bool near_parallel_rows() const { return coherence_max >= 1.0 - 1e-12; }
};

SpectralProfile compute_profile(const DenseMatrix& a);

/// Gram matrix of the smaller side: A A^T if rows <= cols, else A^T A.
/// Row-major, returned with its dimension.
std::pair<std::vector<double>, std::size_t> smaller_gram(const DenseMatrix& a);

//
// Thin singular value decomposition A = U diag(s) V^T with U of shape
// rows x k, V of shape cols x k, k = min(rows, cols), singular values
// descending. One-sided Jacobi orthogonalization; small singular values come
// out with high relative accuracy, which the Gram route cannot deliver on
// highly coherent instances.
//
struct Svd {
    std::vector<double> u;       // rows x k, row-major
    std::vector<double> sigma;   // k, descending
    std::vector<double> v;       // cols x k, row-major
    std::size_t k = 0;
};
Svd singular_values_jacobi(const DenseMatrix& a);

enum class MinNormMethod {
    automatic,           // svd_jacobi up to dimension 2000, else conjugate_gradient
    svd_jacobi,          // truncated pseudoinverse from the one-sided Jacobi SVD
    conjugate_gradient,  // matrix-free CG on A A^T y = b, x = A^T y
};

/// Minimum-norm solution of a consistent system. Throws if the residual check
/// |A x - b| <= 1e-8 (1 + |b|) fails.
Vector min_norm_solution(const DenseMatrix& a, const Vector& b,
                         MinNormMethod method = MinNormMethod::automatic);

//
// Per-iteration contraction factors of the four expected-error estimates.
// airk_factor is mirk_factor * rk_factor by construction.
//
struct RateBounds {
    double rk_factor = 0.0;
    double tsk_factor = 0.0;
    double airk_factor = 0.0;
    double mirk_factor = 0.0;
};

RateBounds rate_bounds(const SpectralProfile& p);

/// True iff rank and row count satisfy the condition under which the
/// alternated-inertial rate bound is provably no worse than the two-subspace
/// one: 2 <= r <= I <= 1 + 9 (1 + sqrt(1 - 8/(9r)))^2 r^2 (r-1) / 4.
/// Throws for rank < 2 (condition inapplicable).
bool bound_ordering_condition(std::size_t rank, std::size_t rows);

/// Gap polynomial certifying the bound ordering at coherence level t:
/// (1 - 1/r)(1/(I-1) + t^2) - t^2 (1 - t)^2. Nonnegative on [0,1] whenever
/// bound_ordering_condition holds. Requires r >= 2, I >= 2.
double comparison_gap(std::size_t rank, std::size_t rows, double coherence);

}  // namespace kaczmarz::spectral

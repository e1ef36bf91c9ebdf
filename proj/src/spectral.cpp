#include "kaczmarz/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace kaczmarz::spectral {

namespace {

double off_diagonal_norm(const std::vector<double>& a, std::size_t n) {
    double sum = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            sum += 2.0 * a[p * n + q] * a[p * n + q];
        }
    }
    return std::sqrt(sum);
}

// Cyclic Jacobi on a working copy of m. Accumulates rotations into vectors
// when requested. Deterministic sweep order (row by row), fixed for
// reproducibility.
void jacobi(std::vector<double>& a, std::size_t n, std::vector<double>* vectors) {
    if (vectors) {
        vectors->assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            (*vectors)[i * n + i] = 1.0;
        }
    }
    double fro = 0.0;
    for (double x : a) {
        fro += x * x;
    }
    fro = std::sqrt(fro);
    const double tol = 1e-13 * fro;
    if (fro == 0.0) {
        return;
    }
    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        if (off_diagonal_norm(a, n) <= tol) {
            break;
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) {
                    continue;
                }
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                // Rotation angle from the standard stable formulation.
                const double theta = (aqq - app) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e150) {
                    t = 1.0 / (2.0 * theta);
                } else {
                    t = (theta >= 0.0 ? 1.0 : -1.0) /
                        (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r == p || r == q) {
                        continue;
                    }
                    const double arp = a[r * n + p];
                    const double arq = a[r * n + q];
                    a[r * n + p] = arp - s * (arq + tau * arp);
                    a[r * n + q] = arq + s * (arp - tau * arq);
                    a[p * n + r] = a[r * n + p];
                    a[q * n + r] = a[r * n + q];
                }
                if (vectors) {
                    for (std::size_t r = 0; r < n; ++r) {
                        const double vrp = (*vectors)[r * n + p];
                        const double vrq = (*vectors)[r * n + q];
                        (*vectors)[r * n + p] = vrp - s * (vrq + tau * vrp);
                        (*vectors)[r * n + q] = vrq + s * (vrp - tau * vrq);
                    }
                }
            }
        }
    }
}

void check_symmetric(std::span<const double> m, std::size_t n) {
    if (m.size() != n * n) {
        throw std::invalid_argument("symmetric_eigenvalues: not n x n");
    }
    double fro = 0.0;
    for (double x : m) {
        fro += x * x;
    }
    fro = std::sqrt(fro);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            if (std::abs(m[p * n + q] - m[q * n + p]) > 1e-12 * std::max(fro, 1e-300)) {
                throw std::invalid_argument("symmetric_eigenvalues: asymmetric input");
            }
        }
    }
}

}  // namespace

std::vector<double> symmetric_eigenvalues(std::span<const double> m,
                                          std::size_t n) {
    check_symmetric(m, n);
    std::vector<double> a(m.begin(), m.end());
    jacobi(a, n, nullptr);
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        values[i] = a[i * n + i];
    }
    std::sort(values.begin(), values.end());
    return values;
}

SymmetricEigen symmetric_eigendecomposition(std::span<const double> m,
                                            std::size_t n) {
    check_symmetric(m, n);
    std::vector<double> a(m.begin(), m.end());
    std::vector<double> vectors;
    jacobi(a, n, &vectors);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return a[x * n + x] < a[y * n + y];
    });

    SymmetricEigen out;
    out.n = n;
    out.values.resize(n);
    out.vectors.assign(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a[order[j] * n + order[j]];
        for (std::size_t r = 0; r < n; ++r) {
            out.vectors[r * n + j] = vectors[r * n + order[j]];
        }
    }
    return out;
}

std::pair<std::vector<double>, std::size_t> smaller_gram(const DenseMatrix& a) {
    const std::size_t rows = a.rows();
    const std::size_t cols = a.cols();
    if (rows <= cols) {
        std::vector<double> g(rows * rows);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = i; j < rows; ++j) {
                const double v = linalg::dot(a.row(i), a.row(j));
                g[i * rows + j] = v;
                g[j * rows + i] = v;
            }
        }
        return {std::move(g), rows};
    }
    std::vector<double> g(cols * cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
        const auto row = a.row(i);
        for (std::size_t p = 0; p < cols; ++p) {
            const double rp = row[p];
            if (rp == 0.0) {
                continue;
            }
            for (std::size_t q = p; q < cols; ++q) {
                g[p * cols + q] += rp * row[q];
            }
        }
    }
    for (std::size_t p = 0; p < cols; ++p) {
        for (std::size_t q = p + 1; q < cols; ++q) {
            g[q * cols + p] = g[p * cols + q];
        }
    }
    return {std::move(g), cols};
}

SpectralProfile compute_profile(const DenseMatrix& a) {
    if (a.rows() < 2) {
        throw std::invalid_argument(
            "compute_profile: coherence undefined for fewer than two rows");
    }
    SpectralProfile p;
    const auto weights = a.row_sq_norms();
    double fro_sq = 0.0;
    double sum_w_sq = 0.0;
    double min_w = weights[0];
    for (double w : weights) {
        fro_sq += w;
        sum_w_sq += w * w;
        min_w = std::min(min_w, w);
    }
    p.fro_sq = fro_sq;
    p.alpha_f = fro_sq - min_w;
    p.upsilon = fro_sq * fro_sq - sum_w_sq;

    // Exhaustive pair scan over normalized rows.
    std::vector<double> inv_norms(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        inv_norms[i] = 1.0 / std::sqrt(weights[i]);
    }
    double cmin = 2.0;
    double cmax = -1.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = i + 1; j < a.rows(); ++j) {
            const double cosine =
                std::abs(linalg::dot(a.row(i), a.row(j))) * inv_norms[i] * inv_norms[j];
            cmin = std::min(cmin, cosine);
            cmax = std::max(cmax, cosine);
        }
    }
    p.coherence_min = cmin;
    p.coherence_max = cmax;

    const auto [gram, n] = smaller_gram(a);
    const auto eigs = symmetric_eigenvalues(gram, n);
    const double lam_max = eigs.back();
    const double cutoff = kRankThreshold * lam_max;
    std::size_t rank = 0;
    double lam_min_nz = lam_max;
    for (double lam : eigs) {
        if (lam > cutoff) {
            ++rank;
            lam_min_nz = std::min(lam_min_nz, lam);
        }
    }
    p.rank = rank;
    p.lambda_min_nz = lam_min_nz;

    const auto d_term = [](double t) { return t * t * (1.0 - t) / (1.0 + t); };
    p.d_const = std::min(d_term(p.coherence_min), d_term(p.coherence_max));
    return p;
}

Svd singular_values_jacobi(const DenseMatrix& a) {
    // Work on the tall orientation M (m x n, m >= n) so the rotated side is
    // the small one; transposing swaps the roles of U and V.
    const bool transposed = a.rows() > a.cols();
    const std::size_t m = transposed ? a.rows() : a.cols();
    const std::size_t n = transposed ? a.cols() : a.rows();

    // Columns of M, stored contiguously per column.
    std::vector<Vector> q(n, Vector(m));
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (transposed) {
                q[j][i] = a(i, j);
            } else {
                q[i][j] = a(i, j);
            }
        }
    }
    std::vector<Vector> rot(n, Vector(n, 0.0));  // accumulated rotations, columns
    for (std::size_t i = 0; i < n; ++i) {
        rot[i][i] = 1.0;
    }
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        sq[i] = linalg::norm_sq(q[i]);
    }

    constexpr double kOrthTol = 1e-14;
    constexpr int kMaxSweeps = 60;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t r = p + 1; r < n; ++r) {
                const double g = linalg::dot(q[p], q[r]);
                if (g * g <= kOrthTol * kOrthTol * sq[p] * sq[r]) {
                    continue;
                }
                rotated = true;
                const double zeta = (sq[r] - sq[p]) / (2.0 * g);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t i = 0; i < m; ++i) {
                    const double qp = q[p][i];
                    const double qr = q[r][i];
                    q[p][i] = c * qp - s * qr;
                    q[r][i] = s * qp + c * qr;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vp = rot[p][i];
                    const double vr = rot[r][i];
                    rot[p][i] = c * vp - s * vr;
                    rot[r][i] = s * vp + c * vr;
                }
                sq[p] = linalg::norm_sq(q[p]);
                sq[r] = linalg::norm_sq(q[r]);
            }
        }
        if (!rotated) {
            break;
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return sq[x] > sq[y]; });

    Svd out;
    out.k = n;
    out.sigma.resize(n);
    // Tall-side orthonormal columns and the rotated small-side basis.
    std::vector<double> tall(m * n, 0.0);
    std::vector<double> small(n * n, 0.0);
    for (std::size_t jj = 0; jj < n; ++jj) {
        const std::size_t src = order[jj];
        const double sigma = std::sqrt(sq[src]);
        out.sigma[jj] = sigma;
        if (sigma > 0.0) {
            for (std::size_t i = 0; i < m; ++i) {
                tall[i * n + jj] = q[src][i] / sigma;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            small[i * n + jj] = rot[src][i];
        }
    }
    if (transposed) {
        out.u = std::move(tall);   // rows x k
        out.v = std::move(small);  // cols x k
    } else {
        out.u = std::move(small);
        out.v = std::move(tall);
    }
    return out;
}

namespace {

// x = V diag(1/sigma) U^T b over singular values above the truncation level,
// polished by iterative refinement with the same factorization. The result
// lies in the row space of A (it is a combination of right singular vectors
// with nonzero singular values).
Vector min_norm_svd(const DenseMatrix& a, const Vector& b) {
    const Svd svd = singular_values_jacobi(a);
    const double eps = 2.220446049250313e-16;
    const double cutoff =
        static_cast<double>(std::max(a.rows(), a.cols())) * eps * svd.sigma.front();

    const std::size_t rows = a.rows();
    const std::size_t cols = a.cols();
    const auto solve_once = [&](const Vector& rhs) {
        Vector coeff(svd.k, 0.0);
        for (std::size_t j = 0; j < svd.k; ++j) {
            if (svd.sigma[j] <= cutoff) {
                continue;
            }
            double proj = 0.0;
            for (std::size_t r = 0; r < rows; ++r) {
                proj += svd.u[r * svd.k + j] * rhs[r];
            }
            coeff[j] = proj / svd.sigma[j];
        }
        Vector x(cols, 0.0);
        for (std::size_t r = 0; r < cols; ++r) {
            double acc = 0.0;
            for (std::size_t j = 0; j < svd.k; ++j) {
                acc += svd.v[r * svd.k + j] * coeff[j];
            }
            x[r] = acc;
        }
        return x;
    };

    Vector x = solve_once(b);
    const double target = 1e-11 * (1.0 + linalg::norm(b));
    for (int pass = 0; pass < 4; ++pass) {
        Vector r = linalg::residual(a, x, b);
        if (linalg::norm(r) <= target) {
            break;
        }
        const Vector dx = solve_once(r);
        for (std::size_t j = 0; j < x.size(); ++j) {
            x[j] -= dx[j];
        }
    }
    return x;
}

// Matrix-free CG on A A^T y = b; returns x = A^T y, which stays in the row
// space by construction. Relative residual target 1e-14.
Vector min_norm_cg(const DenseMatrix& a, const Vector& b) {
    const std::size_t rows = a.rows();
    const double b_norm = linalg::norm(b);
    Vector y(rows, 0.0);
    if (b_norm == 0.0) {
        return Vector(a.cols(), 0.0);
    }
    Vector r = b;
    Vector p = r;
    double rs = linalg::norm_sq(r);
    const double target = 1e-14 * b_norm;
    const std::size_t max_iters = 20 * rows + 100;
    for (std::size_t it = 0; it < max_iters && std::sqrt(rs) > target; ++it) {
        const Vector atp = linalg::multiply_transpose(a, p);
        const Vector gp = linalg::multiply(a, atp);
        const double denom = linalg::dot(p, gp);
        if (denom <= 0.0) {
            break;  // hit the null space; the a-posteriori check decides
        }
        const double alpha = rs / denom;
        linalg::axpy(y, alpha, p);
        linalg::axpy(r, -alpha, gp);
        const double rs_new = linalg::norm_sq(r);
        const double beta = rs_new / rs;
        rs = rs_new;
        for (std::size_t i = 0; i < rows; ++i) {
            p[i] = r[i] + beta * p[i];
        }
    }
    return linalg::multiply_transpose(a, y);
}

}  // namespace

Vector min_norm_solution(const DenseMatrix& a, const Vector& b,
                         MinNormMethod method) {
    if (b.size() != a.rows()) {
        throw std::invalid_argument("min_norm_solution: dimension mismatch");
    }
    if (method == MinNormMethod::automatic) {
        method = (std::min(a.rows(), a.cols()) <= 2000)
                     ? MinNormMethod::svd_jacobi
                     : MinNormMethod::conjugate_gradient;
    }
    Vector x = (method == MinNormMethod::svd_jacobi) ? min_norm_svd(a, b)
                                                     : min_norm_cg(a, b);
    const double res = linalg::norm(linalg::residual(a, x, b));
    if (res > 1e-8 * (1.0 + linalg::norm(b))) {
        throw std::runtime_error(
            "min_norm_solution: system is inconsistent (residual " +
            linalg::format_real(res) + ")");
    }
    return x;
}

RateBounds rate_bounds(const SpectralProfile& p) {
    if (p.coherence_min >= 1.0) {
        throw std::domain_error(
            "rate_bounds: coherence_min = 1 (all row pairs parallel)");
    }
    RateBounds r;
    r.rk_factor = 1.0 - p.lambda_min_nz / p.fro_sq;
    r.tsk_factor =
        r.rk_factor * r.rk_factor - p.lambda_min_nz * p.d_const / p.fro_sq;
    r.mirk_factor =
        1.0 - p.lambda_min_nz /
                  (p.alpha_f * (1.0 - p.coherence_min * p.coherence_min));
    r.airk_factor = r.mirk_factor * r.rk_factor;
    return r;
}

bool bound_ordering_condition(std::size_t rank, std::size_t rows) {
    if (rank < 2) {
        throw std::domain_error("bound_ordering_condition: requires rank >= 2");
    }
    const double r = static_cast<double>(rank);
    const double s = std::sqrt(1.0 - 8.0 / (9.0 * r));
    const double limit = 1.0 + 9.0 * (1.0 + s) * (1.0 + s) * r * r * (r - 1.0) / 4.0;
    return rank <= rows && static_cast<double>(rows) <= limit;
}

double comparison_gap(std::size_t rank, std::size_t rows, double coherence) {
    const double r = static_cast<double>(rank);
    const double im1 = static_cast<double>(rows) - 1.0;
    const double t = coherence;
    return (1.0 - 1.0 / r) * (1.0 / im1 + t * t) - t * t * (1.0 - t) * (1.0 - t);
}

}  // namespace kaczmarz::spectral

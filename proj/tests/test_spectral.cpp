#include <doctest.h>

#include <cmath>

#include "kaczmarz/problems.hpp"
#include "kaczmarz/sampling.hpp"
#include "kaczmarz/spectral.hpp"
#include "oracles.hpp"

using namespace kaczmarz;
using linalg::DenseMatrix;
using linalg::Vector;

TEST_SUITE("spectral") {

TEST_CASE("symmetric eigenvalues") {
    const std::vector<double> eye{1, 0, 0, 1};
    const auto e1 = spectral::symmetric_eigenvalues(eye, 2);
    CHECK(e1[0] == doctest::Approx(1.0));
    CHECK(e1[1] == doctest::Approx(1.0));

    // Roots of the characteristic polynomial worked out by hand.
    const std::vector<double> m{2, 1, 1, 1};
    const auto e2 = spectral::symmetric_eigenvalues(m, 2);
    CHECK(e2[0] == doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-12));
    CHECK(e2[1] == doctest::Approx((3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-12));

    const std::vector<double> diag{0, 0, 0, 0, 4, 0, 0, 0, 9};
    const auto e3 = spectral::symmetric_eigenvalues(diag, 3);
    CHECK(e3[0] == doctest::Approx(0.0));
    CHECK(e3[1] == doctest::Approx(4.0));
    CHECK(e3[2] == doctest::Approx(9.0));

    CHECK_THROWS_AS(spectral::symmetric_eigenvalues(std::vector<double>{1, 2, 3}, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        spectral::symmetric_eigenvalues(std::vector<double>{1, 2, 3, 4}, 2),
        std::invalid_argument);
}

TEST_CASE("eigendecomposition reconstructs the matrix") {
    sampling::RngStream rng(5);
    const std::size_t n = 6;
    std::vector<double> m(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = -1.0 + 2.0 * rng.uniform();
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    const auto eig = spectral::symmetric_eigendecomposition(m, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                acc += eig.vectors[i * n + k] * eig.values[k] * eig.vectors[j * n + k];
            }
            CHECK(std::abs(acc - m[i * n + j]) <= 1e-10);
        }
    }
}

TEST_CASE("profile of small matrices") {
    const auto p = spectral::compute_profile(DenseMatrix::identity(2));
    CHECK(p.coherence_min == doctest::Approx(0.0));
    CHECK(p.coherence_max == doctest::Approx(0.0));
    CHECK(p.lambda_min_nz == doctest::Approx(1.0));
    CHECK(p.alpha_f == doctest::Approx(1.0));
    CHECK(p.upsilon == doctest::Approx(2.0));
    CHECK(p.d_const == doctest::Approx(0.0));
    CHECK(p.rank == 2);

    const double s = std::sqrt(2.0) / 2.0;
    const DenseMatrix a(2, 2, {1, 0, s, s});
    const auto p2 = spectral::compute_profile(a);
    CHECK(p2.coherence_min == doctest::Approx(s).epsilon(1e-12));
    CHECK(p2.coherence_max == doctest::Approx(s).epsilon(1e-12));

    CHECK_THROWS_AS(spectral::compute_profile(DenseMatrix(1, 2, {1, 1})),
                    std::invalid_argument);
}

TEST_CASE("profile of a standardized matrix") {
    problems::GenSpec spec;
    spec.rows = 8;
    spec.cols = 5;
    spec.c = 0.3;
    spec.seed = 123;
    const auto inst = problems::generate(spec);
    const auto p = spectral::compute_profile(inst.a);
    const double rows = static_cast<double>(spec.rows);
    CHECK(p.fro_sq == doctest::Approx(rows).epsilon(1e-10));
    CHECK(p.upsilon == doctest::Approx(rows * (rows - 1.0)).epsilon(1e-9));
    CHECK(p.alpha_f == doctest::Approx(rows - 1.0).epsilon(1e-10));
    CHECK(p.alpha_f < p.fro_sq);
    CHECK(p.coherence_min <= p.coherence_max);
    CHECK(p.coherence_max <= 1.0);
}

TEST_CASE("rank matches the row-reduction oracle") {
    sampling::RngStream rng(17);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t rows = 2 + static_cast<std::size_t>(rng.uniform() * 6);
        const std::size_t cols = 1 + static_cast<std::size_t>(rng.uniform() * 7);
        Vector data(rows * cols);
        for (double& x : data) {
            x = -1.0 + 2.0 * rng.uniform();
        }
        // Half the time force a rank deficiency by duplicating a row.
        if (rows >= 2 && rep % 2 == 0) {
            for (std::size_t j = 0; j < cols; ++j) {
                data[(rows - 1) * cols + j] = 2.0 * data[j];
            }
        }
        DenseMatrix a(rows, cols, std::move(data));
        const auto p = spectral::compute_profile(a);
        CHECK(p.rank == oracles::rank_row_reduction(a));
    }
}

TEST_CASE("row-space norm inequality") {
    // |A x|^2 >= lambda_min_nz |x|^2 for x in the row space.
    sampling::RngStream rng(29);
    problems::GenSpec spec;
    spec.rows = 7;
    spec.cols = 5;
    spec.c = 0.0;
    spec.seed = 31;
    const auto inst = problems::generate(spec);
    const auto p = spectral::compute_profile(inst.a);
    for (int rep = 0; rep < 1000; ++rep) {
        Vector w(inst.a.rows());
        for (double& x : w) {
            x = -1.0 + 2.0 * rng.uniform();
        }
        const Vector x = linalg::multiply_transpose(inst.a, w);
        const double lhs = linalg::norm_sq(linalg::multiply(inst.a, x));
        const double rhs = p.lambda_min_nz * linalg::norm_sq(x);
        CHECK(lhs >= rhs - 1e-8 * std::max(1.0, rhs));
    }
}

TEST_CASE("minimum-norm solution") {
    const Vector x1 = spectral::min_norm_solution(DenseMatrix::identity(2), {3, 4});
    CHECK(x1[0] == doctest::Approx(3.0));
    CHECK(x1[1] == doctest::Approx(4.0));

    const Vector x2 = spectral::min_norm_solution(DenseMatrix(1, 2, {1, 1}), {2});
    CHECK(x2[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(x2[1] == doctest::Approx(1.0).epsilon(1e-10));

    // Rank-deficient: duplicated row direction.
    const Vector x3 =
        spectral::min_norm_solution(DenseMatrix(2, 2, {1, 0, 2, 0}), {1, 2});
    CHECK(x3[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(x3[1] == doctest::Approx(0.0));

    CHECK_THROWS_AS(
        spectral::min_norm_solution(DenseMatrix(2, 2, {1, 0, 2, 0}), {1, 3}),
        std::runtime_error);
}

TEST_CASE("minimum-norm solution matches the KKT oracle and stays in the row space") {
    sampling::RngStream rng(41);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t rows = 2 + static_cast<std::size_t>(rng.uniform() * 4);
        const std::size_t cols = rows + static_cast<std::size_t>(rng.uniform() * 4);
        Vector data(rows * cols);
        for (double& x : data) {
            x = -1.0 + 2.0 * rng.uniform();
        }
        DenseMatrix a(rows, cols, std::move(data));
        if (oracles::rank_row_reduction(a) != rows) {
            continue;  // KKT oracle needs full row rank
        }
        Vector b(rows);
        for (double& x : b) {
            x = -1.0 + 2.0 * rng.uniform();
        }
        const Vector got = spectral::min_norm_solution(a, b);
        const Vector want = oracles::min_norm_kkt(a, b);
        for (std::size_t j = 0; j < cols; ++j) {
            CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-8));
        }
        CHECK(oracles::off_row_space_norm(a, got) <=
              1e-8 * std::max(1.0, linalg::norm(got)));
    }
}

TEST_CASE("minimum-norm solution via conjugate gradients") {
    problems::GenSpec spec;
    spec.rows = 12;
    spec.cols = 20;
    spec.c = -0.5;  // well conditioned
    spec.seed = 77;
    const auto inst = problems::generate(spec);
    const Vector via_cg = spectral::min_norm_solution(
        inst.a, inst.b, spectral::MinNormMethod::conjugate_gradient);
    for (std::size_t j = 0; j < via_cg.size(); ++j) {
        CHECK(via_cg[j] == doctest::Approx(inst.x_min_norm[j]).epsilon(1e-9));
    }
}

TEST_CASE("minimum-norm solution is norm-minimal among solutions") {
    // Matrix with a known null space: last column never touched.
    const DenseMatrix a(2, 3, {1, 2, 0, 0, 1, 0});
    const Vector b{3, 1};
    const Vector x = spectral::min_norm_solution(a, b);
    sampling::RngStream rng(53);
    for (int rep = 0; rep < 50; ++rep) {
        Vector other = x;
        other[2] += -2.0 + 4.0 * rng.uniform();  // stays a solution
        CHECK(linalg::norm(x) <= linalg::norm(other) + 1e-12);
    }
}

TEST_CASE("rate bound formulas") {
    // Single-equation system scaled so the bound collapses to zero.
    spectral::SpectralProfile p;
    p.rank = 1;
    p.lambda_min_nz = 4.0;
    p.fro_sq = 4.0;
    p.alpha_f = 3.0;
    p.coherence_min = 0.0;
    p.coherence_max = 0.0;
    p.d_const = 0.0;
    const auto rb = spectral::rate_bounds(p);
    CHECK(rb.rk_factor == doctest::Approx(0.0));

    // Zero minimal coherence: the two-row factor reduces to the square of the
    // single-row one, while the inertial factor still improves on it.
    spectral::SpectralProfile q;
    q.rank = 3;
    q.lambda_min_nz = 0.8;
    q.fro_sq = 6.0;
    q.alpha_f = 5.0;
    q.coherence_min = 0.0;
    q.coherence_max = 0.4;
    q.d_const = 0.0;  // min over both coherence levels, attained at 0
    const auto rbq = spectral::rate_bounds(q);
    CHECK(rbq.tsk_factor == doctest::Approx(rbq.rk_factor * rbq.rk_factor));
    CHECK(rbq.mirk_factor < rbq.rk_factor);
    CHECK(rbq.airk_factor == rbq.mirk_factor * rbq.rk_factor);

    spectral::SpectralProfile bad = q;
    bad.coherence_min = 1.0;
    CHECK_THROWS_AS(spectral::rate_bounds(bad), std::domain_error);
}

TEST_CASE("rate bounds on a generated instance") {
    problems::GenSpec spec;
    spec.rows = 50;
    spec.cols = 20;
    spec.c = 0.9;
    spec.seed = 42;
    const auto inst = problems::generate(spec);
    const auto p = spectral::compute_profile(inst.a);
    const auto rb = spectral::rate_bounds(p);
    for (const double f :
         {rb.rk_factor, rb.tsk_factor, rb.airk_factor, rb.mirk_factor}) {
        CHECK(f > 0.0);
        CHECK(f < 1.0);
    }
    CHECK(rb.airk_factor <= rb.tsk_factor + 1e-14);
}

TEST_CASE("all contraction factors live in [0,1)") {
    sampling::RngStream rng(61);
    for (int rep = 0; rep < 30; ++rep) {
        problems::GenSpec spec;
        spec.rows = 3 + static_cast<std::size_t>(rng.uniform() * 20);
        spec.cols = 2 + static_cast<std::size_t>(rng.uniform() * 15);
        spec.c = -0.5 + 1.4 * rng.uniform();
        spec.seed = 6000 + rep;
        spec.standardize = (rep % 2 == 0);
        const auto inst = problems::generate(spec);
        const auto p = spectral::compute_profile(inst.a);
        if (p.coherence_min >= 1.0) {
            continue;
        }
        const auto rb = spectral::rate_bounds(p);
        for (const double f :
             {rb.rk_factor, rb.tsk_factor, rb.airk_factor, rb.mirk_factor}) {
            CHECK(f >= 0.0);
            CHECK(f < 1.0);
        }
    }
}

TEST_CASE("bound ordering condition") {
    CHECK(spectral::bound_ordering_condition(2, 2));
    CHECK_FALSE(spectral::bound_ordering_condition(2, 1000));
    // Full row rank always qualifies.
    for (std::size_t r : {2u, 3u, 10u, 50u}) {
        CHECK(spectral::bound_ordering_condition(r, r));
    }
    CHECK_THROWS_AS(spectral::bound_ordering_condition(1, 5), std::domain_error);
}

TEST_CASE("comparison gap endpoints and minimizer") {
    // At zero coherence only the positive term survives.
    CHECK(spectral::comparison_gap(3, 10, 0.0) ==
          doctest::Approx((1.0 - 1.0 / 3.0) / 9.0));
    CHECK(spectral::comparison_gap(3, 10, 0.0) > 0.0);
    // At coherence one the negative term vanishes.
    CHECK(spectral::comparison_gap(4, 7, 1.0) ==
          doctest::Approx((1.0 - 1.0 / 4.0) * (1.0 / 6.0 + 1.0)));
    CHECK(spectral::comparison_gap(4, 7, 1.0) > 0.0);

    // Grid minimizer agrees with the closed form 2 / (3r (1 + sqrt(1-8/(9r)))).
    const std::size_t r = 3;
    const std::size_t rows = 20;
    double best_t = 0.0;
    double best = spectral::comparison_gap(r, rows, 0.0);
    for (int i = 1; i <= 10000; ++i) {
        const double t = static_cast<double>(i) / 10000.0;
        const double g = spectral::comparison_gap(r, rows, t);
        if (g < best) {
            best = g;
            best_t = t;
        }
    }
    const double closed =
        2.0 / (3.0 * 3.0 * (1.0 + std::sqrt(1.0 - 8.0 / (9.0 * 3.0))));
    CHECK(std::abs(best_t - closed) <= 1e-4 + 1e-12);
}

}  // TEST_SUITE

#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "kaczmarz/sampling.hpp"
#include "oracles.hpp"

using namespace kaczmarz;
using linalg::DenseMatrix;
using linalg::Vector;
using sampling::RngStream;
using sampling::RowSampler;

namespace {

// Column matrix whose rows have the given squared norms.
DenseMatrix rows_with_sq_norms(const std::vector<double>& sq) {
    Vector data(sq.size());
    for (std::size_t i = 0; i < sq.size(); ++i) {
        data[i] = std::sqrt(sq[i]);
    }
    return DenseMatrix(sq.size(), 1, std::move(data));
}

double chi_sq_stat(const std::vector<std::size_t>& observed,
                   const std::vector<double>& expected) {
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double d = static_cast<double>(observed[i]) - expected[i];
        stat += d * d / expected[i];
    }
    return stat;
}

}  // namespace

TEST_SUITE("sampling") {

TEST_CASE("streams are deterministic and seed 0 is remapped") {
    RngStream a(1234), b(1234);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    RngStream z1(0), z2(0);
    CHECK(z1.next_u64() == z2.next_u64());
    CHECK(z1.next_u64() != 0);

    RngStream d1 = RngStream::derived(42, 0);
    RngStream d2 = RngStream::derived(42, 1);
    CHECK(d1.next_u64() != d2.next_u64());
}

TEST_CASE("uniform draws live in [0,1)") {
    RngStream rng(9);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
}

TEST_CASE("single-row sampler always picks that row") {
    const RowSampler s(DenseMatrix(1, 2, {3, 4}));
    RngStream rng(1);
    for (int i = 0; i < 1000; ++i) {
        CHECK(s.sample_row(rng) == 0);
    }
}

TEST_CASE("row law matches the squared-norm weights") {
    const RowSampler s(rows_with_sq_norms({1.0, 3.0}));
    RngStream rng(2024);
    const std::size_t n = 1'000'000;
    std::vector<std::size_t> counts(2, 0);
    for (std::size_t i = 0; i < n; ++i) {
        ++counts[s.sample_row(rng)];
    }
    const std::vector<double> expected{0.25 * n, 0.75 * n};
    // Per-bin 3 sigma and an overall chi-square check.
    for (std::size_t i = 0; i < 2; ++i) {
        const double p = expected[i] / n;
        const double sigma = std::sqrt(n * p * (1.0 - p));
        CHECK(std::abs(static_cast<double>(counts[i]) - expected[i]) <= 3.0 * sigma);
    }
    CHECK(chi_sq_stat(counts, expected) < oracles::chi_sq_crit_p001(1));
}

TEST_CASE("standardized rows sample uniformly") {
    const RowSampler s(rows_with_sq_norms({1, 1, 1, 1, 1}));
    RngStream rng(7);
    const std::size_t n = 500'000;
    std::vector<std::size_t> counts(5, 0);
    for (std::size_t i = 0; i < n; ++i) {
        ++counts[s.sample_row(rng)];
    }
    const std::vector<double> expected(5, n / 5.0);
    CHECK(chi_sq_stat(counts, expected) < oracles::chi_sq_crit_p001(4));
}

TEST_CASE("pair law over two rows") {
    const RowSampler s(rows_with_sq_norms({1, 1}));
    RngStream rng(5);
    std::size_t first_01 = 0;
    const std::size_t n = 200'000;
    for (std::size_t i = 0; i < n; ++i) {
        const auto [j, k] = s.sample_pair(rng);
        CHECK(j != k);
        if (j == 0) ++first_01;
    }
    const double sigma = std::sqrt(n * 0.25);
    CHECK(std::abs(static_cast<double>(first_01) - n / 2.0) <= 3.0 * sigma);
}

TEST_CASE("pair law matches the product weights") {
    // Squared norms (1,1,2): normalization is 2(1*1 + 1*2 + 2*1) = 10, so the
    // ordered pair (third, first) has probability 2/10.
    const std::vector<double> sq{1, 1, 2};
    const RowSampler s(rows_with_sq_norms(sq));
    RngStream rng(99);
    const std::size_t n = 1'000'000;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> counts;
    for (std::size_t i = 0; i < n; ++i) {
        const auto pr = s.sample_pair(rng);
        CHECK(pr.first != pr.second);
        ++counts[pr];
    }
    double upsilon = 0.0;
    for (std::size_t j = 0; j < sq.size(); ++j) {
        for (std::size_t i = 0; i < sq.size(); ++i) {
            if (i != j) upsilon += sq[j] * sq[i];
        }
    }
    std::vector<std::size_t> observed;
    std::vector<double> expected;
    for (std::size_t j = 0; j < sq.size(); ++j) {
        for (std::size_t i = 0; i < sq.size(); ++i) {
            if (i == j) continue;
            observed.push_back(counts[{j, i}]);
            expected.push_back(n * sq[j] * sq[i] / upsilon);
        }
    }
    CHECK(expected[4] == doctest::Approx(0.2 * n));  // pair (2,0)
    const double sigma = std::sqrt(n * 0.2 * 0.8);
    CHECK(std::abs(static_cast<double>(counts[{2, 0}]) - 0.2 * n) <= 3.0 * sigma);
    CHECK(chi_sq_stat(observed, expected) < oracles::chi_sq_crit_p001(5));

    CHECK_THROWS_AS(RowSampler(DenseMatrix(1, 1, {1})).sample_pair(rng),
                    std::invalid_argument);
}

TEST_CASE("exclusion law renormalizes the remaining weights") {
    {
        const RowSampler s(rows_with_sq_norms({1, 1}));
        RngStream rng(3);
        for (int i = 0; i < 1000; ++i) {
            CHECK(s.sample_excluding(0, rng) == 1);
        }
    }
    {
        const RowSampler s(rows_with_sq_norms({1, 1, 1}));
        RngStream rng(4);
        std::size_t zero = 0;
        const std::size_t n = 200'000;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = s.sample_excluding(1, rng);
            CHECK(k != 1);
            if (k == 0) ++zero;
        }
        const double sigma = std::sqrt(n * 0.25);
        CHECK(std::abs(static_cast<double>(zero) - n / 2.0) <= 3.0 * sigma);
    }
    {
        // Squared norms (1,2,3), excluding the third: P(0) = 1/3, P(1) = 2/3.
        const RowSampler s(rows_with_sq_norms({1, 2, 3}));
        RngStream rng(8);
        const std::size_t n = 1'000'000;
        std::vector<std::size_t> counts(3, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[s.sample_excluding(2, rng)];
        }
        CHECK(counts[2] == 0);
        const std::vector<double> expected{n / 3.0, 2.0 * n / 3.0};
        const std::vector<std::size_t> observed{counts[0], counts[1]};
        CHECK(chi_sq_stat(observed, expected) < oracles::chi_sq_crit_p001(1));

        CHECK_THROWS_AS(RowSampler(DenseMatrix(1, 1, {1})).sample_excluding(0, rng),
                        std::invalid_argument);
    }
}

TEST_CASE("same seed gives identical index sequences") {
    const RowSampler s(rows_with_sq_norms({0.5, 1.5, 2.0, 0.25}));
    RngStream a(777), b(777);
    for (int i = 0; i < 2000; ++i) {
        CHECK(s.sample_row(a) == s.sample_row(b));
        CHECK(s.sample_pair(a) == s.sample_pair(b));
        CHECK(s.sample_excluding(1, a) == s.sample_excluding(1, b));
    }
}

}  // TEST_SUITE

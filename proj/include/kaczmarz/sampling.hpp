#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "kaczmarz/linalg.hpp"

namespace kaczmarz::sampling {

/// Default seed used by every command-line entry point.
constexpr std::uint64_t kDefaultSeed = 42;

/// Deterministic scramble used to derive per-trial seeds from a base seed:
/// base ^ splitmix64(index * golden-ratio constant).
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t stream_index);

//
// RngStream: xoshiro256++ with splitmix64 seeding. Integer state only, so a
// given seed produces the same draw sequence on every platform. Seed 0 is
// remapped to a fixed nonzero constant. One stream per solver run; never
// shared between runs.
//
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform on [0,1) with 53-bit resolution.
    double uniform();

    static RngStream derived(std::uint64_t base_seed, std::uint64_t stream_index) {
        return RngStream(derive_seed(base_seed, stream_index));
    }

  private:
    std::array<std::uint64_t, 4> state_;
};

//
// RowSampler: weighted index selection over the rows of a matrix, weight of
// row i being its squared norm. Selection is a binary search over prefix
// sums, O(log I) per draw. Immutable and shareable across runs.
//
class RowSampler {
  public:
    explicit RowSampler(const linalg::DenseMatrix& a);

    std::size_t rows() const { return row_cum_.size(); }
    double total_weight() const { return total_; }

    /// Row i with probability |A_i|^2 / |A|_F^2. Consumes one uniform draw.
    std::size_t sample_row(RngStream& rng) const;

    /// Ordered pair (first, second), first != second, with probability
    /// |A_first|^2 |A_second|^2 / Upsilon over all ordered pairs. The first
    /// index is drawn from the exact pair marginal w_j (W - w_j); the second
    /// by rejection against the plain row law.
    std::pair<std::size_t, std::size_t> sample_pair(RngStream& rng) const;

    /// Row i != excluded with probability |A_i|^2 / (|A|_F^2 - |A_excluded|^2),
    /// by rejection against the plain row law.
    std::size_t sample_excluding(std::size_t excluded, RngStream& rng) const;

  private:
    std::size_t pick(const std::vector<double>& cum, RngStream& rng) const;

    std::vector<double> row_cum_;
    std::vector<double> pair_cum_;  // prefix sums of w_i * (W - w_i); empty if I < 2
    double total_ = 0.0;
};

}  // namespace kaczmarz::sampling

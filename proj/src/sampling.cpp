#include "kaczmarz/sampling.hpp"

#include <algorithm>
#include <stdexcept>

namespace kaczmarz::sampling {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kZeroSeedReplacement = 0xD1B54A32D192ED03ULL;

std::uint64_t splitmix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t stream_index) {
    return base_seed ^ splitmix64(stream_index * kGolden);
}

RngStream::RngStream(std::uint64_t seed) {
    if (seed == 0) {
        seed = kZeroSeedReplacement;
    }
    std::uint64_t s = seed;
    for (auto& word : state_) {
        s = splitmix64(s);
        word = s;
    }
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

RowSampler::RowSampler(const linalg::DenseMatrix& a) {
    const auto weights = a.row_sq_norms();
    row_cum_.resize(weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        row_cum_[i] = acc;
    }
    total_ = acc;
    if (weights.size() >= 2) {
        pair_cum_.resize(weights.size());
        double pacc = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            pacc += weights[i] * (total_ - weights[i]);
            pair_cum_[i] = pacc;
        }
    }
}

std::size_t RowSampler::pick(const std::vector<double>& cum, RngStream& rng) const {
    const double u = rng.uniform() * cum.back();
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    const std::size_t idx = static_cast<std::size_t>(it - cum.begin());
    return std::min(idx, cum.size() - 1);
}

std::size_t RowSampler::sample_row(RngStream& rng) const {
    return pick(row_cum_, rng);
}

std::pair<std::size_t, std::size_t> RowSampler::sample_pair(RngStream& rng) const {
    if (rows() < 2) {
        throw std::invalid_argument("sample_pair: needs at least two rows");
    }
    const std::size_t first = pick(pair_cum_, rng);
    std::size_t second = first;
    while (second == first) {
        second = pick(row_cum_, rng);
    }
    return {first, second};
}

std::size_t RowSampler::sample_excluding(std::size_t excluded,
                                         RngStream& rng) const {
    if (rows() < 2) {
        throw std::invalid_argument("sample_excluding: needs at least two rows");
    }
    std::size_t i = excluded;
    while (i == excluded) {
        i = pick(row_cum_, rng);
    }
    return i;
}

}  // namespace kaczmarz::sampling

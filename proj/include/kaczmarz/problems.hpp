#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kaczmarz/linalg.hpp"
#include "kaczmarz/sampling.hpp"

namespace kaczmarz::problems {

using linalg::DenseMatrix;
using linalg::Vector;

struct GenSpec {
    std::size_t rows = 100;
    std::size_t cols = 300;
    double c = 0.9;  // entries are i.i.d. uniform on [c, 1); requires c < 1
    std::uint64_t seed = sampling::kDefaultSeed;
    bool standardize = true;
};

//
// A consistent system A x = b with the planted solution and the computed
// minimum-norm solution. Immutable after construction; shareable.
//
struct ProblemInstance {
    DenseMatrix a;
    Vector b;
    Vector x_star;      // planted solution (empty for instances built from parts)
    Vector x_min_norm;  // the reference the RSE stop uses
    GenSpec spec;
    bool standardized = false;
};

//
// Draw A (row-major entry order) and x* from one seeded stream, set b = A x*,
// optionally rescale every row and its right-hand side entry to unit row norm,
// then compute the minimum-norm solution. Deterministic given the spec.
//
ProblemInstance generate(const GenSpec& spec);

/// Wrap an explicit system; computes the minimum-norm solution and verifies
/// consistency. x_star is left empty.
ProblemInstance from_parts(DenseMatrix a, Vector b);

struct CoherenceRow {
    double c = 0.0;
    double mean_coherence_min = 0.0;
    double mean_coherence_max = 0.0;
};

/// Mean coherence constants over `trials` fresh instances per value of c.
std::vector<CoherenceRow> coherence_of_c(std::span<const double> c_values,
                                         std::size_t rows, std::size_t cols,
                                         std::size_t trials,
                                         std::uint64_t base_seed);

/// 64-bit FNV-1a over a byte string; used as the manifest checksum.
std::uint64_t fnv1a64(std::string_view bytes);

//
// Persistence. `save` writes <prefix>.manifest plus <prefix>.A.txt, .b.txt,
// .xstar.txt, .xdag.txt in the plain text formats; `load` verifies the
// checksum and the dimensions.
//
void save(const ProblemInstance& p, const std::string& prefix);
ProblemInstance load(const std::string& prefix);

}  // namespace kaczmarz::problems

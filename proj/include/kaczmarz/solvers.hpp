#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kaczmarz/linalg.hpp"
#include "kaczmarz/sampling.hpp"

namespace kaczmarz::solvers {

using linalg::DenseMatrix;
using linalg::Vector;

enum class SolverKind { rk, tsk, airk, mirk };

SolverKind parse_solver_kind(const std::string& name);
std::string to_string(SolverKind kind);

/// Relative threshold below which the inertial denominator counts as
/// degenerate (rows parallel); the step falls back to plain projection.
constexpr double kParallelEps = 1e-12;

//
// Index-explicit step cores. Each advances x in place using the given row
// indices; the run loop draws the indices. Keeping the cores index-explicit
// lets tests drive both algorithms with a shared index stream.
//

/// x <- projection of x onto the hyperplane of row i.
void rk_apply(const DenseMatrix& a, const Vector& b, std::size_t i, Vector& x);

struct PairStepInfo {
    double mu = 0.0;            // <A_first, A_second>, unnormalized
    double coeff = 0.0;         // inertial coefficient applied (0 on fallback)
    double resid_first = 0.0;   // A_first x - b_first before the step
    double resid_second = 0.0;  // A_second y - b_second at the intermediate point
    bool fallback = false;
};

//
// Two-subspace step: project onto the hyperplane of `first`, orthogonalize
// the `second` row against it, then project onto the resulting direction.
// Requires unit row norms. `ws` is a caller-provided workspace of size cols.
// If y_out is nonnull it receives the intermediate iterate.
//
PairStepInfo tsk_apply(const DenseMatrix& a, const Vector& b, std::size_t first,
                       std::size_t second, Vector& x, Vector& ws,
                       Vector* y_out = nullptr);

//
// Alternated-inertial step: y = P_first x, then an inertial push along the
// first row with the distance-optimal coefficient, then P_second. Works for
// general row norms.
//
PairStepInfo airk_apply(const DenseMatrix& a, const Vector& b, std::size_t first,
                        std::size_t second, Vector& x, Vector* y_out = nullptr);

struct InertialStepInfo {
    double mu = 0.0;      // <A_prev, A_i>, unnormalized
    double coeff = 0.0;   // inertial coefficient applied (0 on fallback)
    double resid = 0.0;   // A_i x - b_i before the step
    bool fallback = false;
};

//
// Multi-step inertial update, literal two-stage route: compute the optimal
// coefficient, form the extrapolated point, then project onto row i
// (recomputing its residual). General row norms.
//
InertialStepInfo mirk_apply_two_stage(const DenseMatrix& a, const Vector& b,
                                      std::size_t prev, std::size_t i, Vector& x);

//
// Same update collapsed into a single two-term correction. Valid only for
// unit row norms; this is the production path for standardized systems.
//
InertialStepInfo mirk_apply_compact(const DenseMatrix& a, const Vector& b,
                                    std::size_t prev, std::size_t i, Vector& x);

//
// Run loop.
//

struct StopRule {
    double rse_tol = 1e-6;
    std::size_t max_iters = 10'000'000;
    Vector reference;           // minimum-norm solution for the RSE stop
    bool residual_stop = false; // stop on |Ax-b|/|b| instead (reference-free)
};

enum class RunStatus { converged, max_iters, error };

struct StepDiagnostics {
    double residual_used = 0.0;
    double mu = 0.0;             // normalized correlation of the rows involved
    double inertial_coeff = 0.0;
    bool fallback = false;
    // Scaled violations of the per-step equalities the algorithms satisfy.
    std::map<std::string, double> identity_residuals;
};

struct TraceRecord {
    std::size_t k = 0;
    double rse = 0.0;
    double seconds = 0.0;
    std::optional<StepDiagnostics> diag;
};

struct RunTrace {
    RunStatus status = RunStatus::error;
    std::size_t iterations = 0;
    double elapsed_s = 0.0;
    double final_rse = 0.0;
    Vector final_x;
    std::vector<TraceRecord> records;  // k = 0..iterations when recording is on
};

struct RunOptions {
    bool diagnostics = false;   // per-step identity checks (costs extra passes)
    bool record_trace = true;   // keep per-iteration records
};

//
// Iterate until the stopping metric falls to stop.rse_tol or the budget runs
// out. The metric is |x - reference|^2 / |reference|^2 unless residual_stop.
// One iteration = one pass through the step core of the algorithm.
//
RunTrace run(SolverKind kind, const DenseMatrix& a, const Vector& b,
             const Vector& x0, const StopRule& stop, std::uint64_t seed,
             const RunOptions& opts = {});

}  // namespace kaczmarz::solvers

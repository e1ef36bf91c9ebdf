#include "kaczmarz/solvers.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace kaczmarz::solvers {

using sampling::RngStream;
using sampling::RowSampler;

SolverKind parse_solver_kind(const std::string& name) {
    if (name == "rk") return SolverKind::rk;
    if (name == "tsk") return SolverKind::tsk;
    if (name == "airk") return SolverKind::airk;
    if (name == "mirk") return SolverKind::mirk;
    throw std::invalid_argument("unknown solver: " + name);
}

std::string to_string(SolverKind kind) {
    switch (kind) {
        case SolverKind::rk: return "rk";
        case SolverKind::tsk: return "tsk";
        case SolverKind::airk: return "airk";
        case SolverKind::mirk: return "mirk";
    }
    return "?";
}

void rk_apply(const DenseMatrix& a, const Vector& b, std::size_t i, Vector& x) {
    const auto row = a.row(i);
    const double step = (linalg::dot(row, x) - b[i]) / a.row_sq_norm(i);
    for (std::size_t j = 0; j < x.size(); ++j) {
        x[j] -= step * row[j];
    }
}

PairStepInfo tsk_apply(const DenseMatrix& a, const Vector& b, std::size_t first,
                       std::size_t second, Vector& x, Vector& ws, Vector* y_out) {
    const auto a_s = a.row(first);
    const auto a_r = a.row(second);
    PairStepInfo info;
    info.mu = linalg::dot(a_r, a_s);
    info.resid_first = linalg::dot(a_s, x) - b[first];
    // Intermediate projection onto the hyperplane of the first row.
    for (std::size_t j = 0; j < x.size(); ++j) {
        x[j] -= info.resid_first * a_s[j];
    }
    if (y_out) {
        *y_out = x;
    }
    const double one_minus = 1.0 - info.mu * info.mu;
    if (one_minus < kParallelEps) {
        info.fallback = true;
        info.resid_second = linalg::dot(a_r, x) - b[second];
        for (std::size_t j = 0; j < x.size(); ++j) {
            x[j] -= info.resid_second * a_r[j];
        }
        return info;
    }
    const double inv_root = 1.0 / std::sqrt(one_minus);
    // Unit vector orthogonal to the first row in the direction of the second.
    for (std::size_t j = 0; j < x.size(); ++j) {
        ws[j] = (a_r[j] - info.mu * a_s[j]) * inv_root;
    }
    const double measurement = (b[second] - info.mu * b[first]) * inv_root;
    const double step = measurement - linalg::dot(x, ws);
    for (std::size_t j = 0; j < x.size(); ++j) {
        x[j] += step * ws[j];
    }
    info.resid_second = -step / inv_root;
    info.coeff = info.resid_second * info.mu / one_minus;
    return info;
}

PairStepInfo airk_apply(const DenseMatrix& a, const Vector& b, std::size_t first,
                        std::size_t second, Vector& x, Vector* y_out) {
    const auto a_j = a.row(first);
    const auto a_i = a.row(second);
    const double w_j = a.row_sq_norm(first);
    const double w_i = a.row_sq_norm(second);
    PairStepInfo info;
    info.resid_first = linalg::dot(a_j, x) - b[first];
    const double step1 = info.resid_first / w_j;
    for (std::size_t t = 0; t < x.size(); ++t) {
        x[t] -= step1 * a_j[t];
    }
    if (y_out) {
        *y_out = x;
    }
    info.mu = linalg::dot(a_j, a_i);
    info.resid_second = linalg::dot(a_i, x) - b[second];
    const double denom = w_j * w_i - info.mu * info.mu;
    if (denom < kParallelEps * w_j * w_i) {
        info.fallback = true;
    } else {
        info.coeff = info.resid_second * info.mu / denom;
    }
    // Inertial push along the first row, then projection onto the second;
    // the projected residual is resid_second + coeff * mu, so both fold into
    // one correction.
    const double step2 = (info.resid_second + info.coeff * info.mu) / w_i;
    for (std::size_t t = 0; t < x.size(); ++t) {
        x[t] += info.coeff * a_j[t] - step2 * a_i[t];
    }
    return info;
}

InertialStepInfo mirk_apply_two_stage(const DenseMatrix& a, const Vector& b,
                                      std::size_t prev, std::size_t i, Vector& x) {
    const auto a_p = a.row(prev);
    const auto a_i = a.row(i);
    const double w_p = a.row_sq_norm(prev);
    const double w_i = a.row_sq_norm(i);
    InertialStepInfo info;
    info.mu = linalg::dot(a_p, a_i);
    info.resid = linalg::dot(a_i, x) - b[i];
    const double denom = w_p * w_i - info.mu * info.mu;
    if (denom < kParallelEps * w_p * w_i) {
        info.fallback = true;
    } else {
        info.coeff = info.resid * info.mu / denom;
    }
    for (std::size_t t = 0; t < x.size(); ++t) {
        x[t] += info.coeff * a_p[t];
    }
    const double step = (linalg::dot(a_i, x) - b[i]) / w_i;
    for (std::size_t t = 0; t < x.size(); ++t) {
        x[t] -= step * a_i[t];
    }
    return info;
}

InertialStepInfo mirk_apply_compact(const DenseMatrix& a, const Vector& b,
                                    std::size_t prev, std::size_t i, Vector& x) {
    const auto a_p = a.row(prev);
    const auto a_i = a.row(i);
    InertialStepInfo info;
    double mu = 0.0;
    double resid = -b[i];
    for (std::size_t t = 0; t < x.size(); ++t) {
        mu += a_i[t] * a_p[t];
        resid += a_i[t] * x[t];
    }
    info.mu = mu;
    info.resid = resid;
    const double one_minus = 1.0 - mu * mu;
    if (one_minus < kParallelEps) {
        info.fallback = true;
        for (std::size_t t = 0; t < x.size(); ++t) {
            x[t] -= resid * a_i[t];
        }
        return info;
    }
    const double along_prev = resid * mu / one_minus;
    const double along_cur = -resid / one_minus;
    info.coeff = along_prev;
    for (std::size_t t = 0; t < x.size(); ++t) {
        x[t] += along_prev * a_p[t] + along_cur * a_i[t];
    }
    return info;
}

namespace {

double diff_norm_sq(const Vector& u, const Vector& v) {
    double sum = 0.0;
    for (std::size_t t = 0; t < u.size(); ++t) {
        const double d = u[t] - v[t];
        sum += d * d;
    }
    return sum;
}

// <row, u - v>
double row_dot_diff(std::span<const double> row, const Vector& u, const Vector& v) {
    double sum = 0.0;
    for (std::size_t t = 0; t < row.size(); ++t) {
        sum += row[t] * (u[t] - v[t]);
    }
    return sum;
}

struct IdentityContext {
    const DenseMatrix& a;
    const Vector& b;
    const Vector& ref;
};

// Per-step equalities of a plain projection from x_prev onto row j, landing
// at y: distance drop, step length, and orthogonality of the update to the
// row. Violations are scaled by the pre-step distance.
void projection_identities(const IdentityContext& ctx, std::size_t j,
                           const Vector& x_prev, const Vector& y,
                           std::map<std::string, double>& out) {
    const double w_j = ctx.a.row_sq_norm(j);
    const double resid = linalg::dot(ctx.a.row(j), x_prev) - ctx.b[j];
    const double d_prev = diff_norm_sq(x_prev, ctx.ref);
    const double d_y = diff_norm_sq(y, ctx.ref);
    const double scale_sq = std::max(1.0, d_prev);

    out["proj_distance_drop"] =
        std::abs(d_y - (d_prev - resid * resid / w_j)) / scale_sq;
    out["proj_step_length"] =
        std::abs(std::sqrt(diff_norm_sq(y, x_prev)) - std::abs(resid) / std::sqrt(w_j)) /
        std::max(1.0, std::sqrt(d_prev));
    out["proj_orthogonality"] =
        std::abs(row_dot_diff(ctx.a.row(j), y, ctx.ref)) /
        (std::sqrt(w_j) * std::max(1.0, std::sqrt(d_prev)));
}

// Per-step equalities of the inertial-then-project move from `from` to `to`
// driven by row i with memory row `mem`: distance drop and step length, both
// carrying the 1/(1 - mu^2) factor of the optimal coefficient.
void inertial_identities(const IdentityContext& ctx, std::size_t mem,
                         std::size_t i, const Vector& from, const Vector& to,
                         std::map<std::string, double>& out) {
    const double w_m = ctx.a.row_sq_norm(mem);
    const double w_i = ctx.a.row_sq_norm(i);
    const double mu = linalg::dot(ctx.a.row(mem), ctx.a.row(i));
    const double mu_hat_sq = mu * mu / (w_m * w_i);
    const double one_minus = 1.0 - mu_hat_sq;
    if (one_minus < kParallelEps) {
        return;  // fallback step; the optimal-coefficient equalities do not apply
    }
    const double resid = linalg::dot(ctx.a.row(i), from) - ctx.b[i];
    const double drop = resid * resid / w_i / one_minus;
    const double d_from = diff_norm_sq(from, ctx.ref);
    const double d_to = diff_norm_sq(to, ctx.ref);
    const double scale_sq = std::max(1.0, d_from);

    out["inertial_distance_drop"] = std::abs(d_to - (d_from - drop)) / scale_sq;
    out["inertial_step_length"] =
        std::abs(diff_norm_sq(to, from) - drop) / scale_sq;
}

}  // namespace

RunTrace run(SolverKind kind, const DenseMatrix& a, const Vector& b,
             const Vector& x0, const StopRule& stop, std::uint64_t seed,
             const RunOptions& opts) {
    if (b.size() != a.rows()) {
        throw std::invalid_argument("run: right-hand side has wrong length");
    }
    if (x0.size() != a.cols()) {
        throw std::invalid_argument("run: initial iterate has wrong length");
    }
    if (stop.rse_tol <= 0.0 || stop.max_iters < 1) {
        throw std::invalid_argument("run: invalid stop rule");
    }
    if (!stop.residual_stop && stop.reference.size() != a.cols()) {
        throw std::invalid_argument("run: reference solution has wrong length");
    }
    if (kind != SolverKind::rk && a.rows() < 2) {
        throw std::invalid_argument("run: " + to_string(kind) +
                                    " needs at least two rows");
    }
    const bool standardized = linalg::is_standardized(a, 1e-10);
    if (kind == SolverKind::tsk && !standardized) {
        throw std::invalid_argument(
            "run: tsk requires a standardized system (unit row norms); "
            "generate without --raw or standardize first");
    }

    const RowSampler sampler(a);
    RngStream rng(seed);
    Vector x = x0;

    const double ref_den = stop.residual_stop
                               ? 0.0
                               : std::max(linalg::norm_sq(stop.reference), 1e-300);
    const double b_norm = std::max(linalg::norm(b), 1e-300);
    const auto metric = [&](const Vector& v) {
        if (stop.residual_stop) {
            return linalg::norm(linalg::residual(a, v, b)) / b_norm;
        }
        return diff_norm_sq(v, stop.reference) / ref_den;
    };

    RunTrace trace;
    double m = metric(x);
    if (opts.record_trace) {
        trace.records.push_back({0, m, 0.0, std::nullopt});
    }
    if (m <= stop.rse_tol) {
        trace.status = RunStatus::converged;
        trace.final_rse = m;
        trace.final_x = std::move(x);
        return trace;
    }

    Vector ws(a.cols());
    Vector x_prev;
    Vector y;
    std::size_t prev_row = 0;
    bool have_prev = false;
    const IdentityContext ctx{a, b, stop.reference};

    trace.status = RunStatus::max_iters;
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t k = 1; k <= stop.max_iters; ++k) {
        std::optional<StepDiagnostics> diag;
        if (opts.diagnostics) {
            diag.emplace();
            x_prev = x;
        }
        switch (kind) {
            case SolverKind::rk: {
                const std::size_t i = sampler.sample_row(rng);
                rk_apply(a, b, i, x);
                if (diag) {
                    diag->residual_used =
                        linalg::dot(a.row(i), x_prev) - b[i];
                    projection_identities(ctx, i, x_prev, x,
                                          diag->identity_residuals);
                }
                break;
            }
            case SolverKind::tsk:
            case SolverKind::airk: {
                const auto [first, second] = sampler.sample_pair(rng);
                PairStepInfo info;
                Vector* y_ptr = diag ? &y : nullptr;
                if (kind == SolverKind::tsk) {
                    info = tsk_apply(a, b, first, second, x, ws, y_ptr);
                } else {
                    info = airk_apply(a, b, first, second, x, y_ptr);
                }
                if (diag) {
                    diag->residual_used = info.resid_second;
                    diag->mu = info.mu / std::sqrt(a.row_sq_norm(first) *
                                                   a.row_sq_norm(second));
                    diag->inertial_coeff = info.coeff;
                    diag->fallback = info.fallback;
                    projection_identities(ctx, first, x_prev, y,
                                          diag->identity_residuals);
                    if (!info.fallback) {
                        inertial_identities(ctx, first, second, y, x,
                                            diag->identity_residuals);
                    }
                }
                break;
            }
            case SolverKind::mirk: {
                if (!have_prev) {
                    const std::size_t i = sampler.sample_row(rng);
                    rk_apply(a, b, i, x);
                    prev_row = i;
                    have_prev = true;
                    if (diag) {
                        diag->residual_used =
                            linalg::dot(a.row(i), x_prev) - b[i];
                        projection_identities(ctx, i, x_prev, x,
                                              diag->identity_residuals);
                    }
                    break;
                }
                const std::size_t i = sampler.sample_excluding(prev_row, rng);
                const InertialStepInfo info =
                    standardized ? mirk_apply_compact(a, b, prev_row, i, x)
                                 : mirk_apply_two_stage(a, b, prev_row, i, x);
                if (diag) {
                    diag->residual_used = info.resid;
                    diag->mu = info.mu / std::sqrt(a.row_sq_norm(prev_row) *
                                                   a.row_sq_norm(i));
                    diag->inertial_coeff = info.coeff;
                    diag->fallback = info.fallback;
                    if (!info.fallback) {
                        inertial_identities(ctx, prev_row, i, x_prev, x,
                                            diag->identity_residuals);
                    }
                }
                prev_row = i;
                break;
            }
        }
        m = metric(x);
        if (!std::isfinite(m)) {
            trace.status = RunStatus::error;
            trace.iterations = k;
            break;
        }
        if (opts.record_trace) {
            const double seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              start)
                    .count();
            trace.records.push_back({k, m, seconds, std::move(diag)});
        }
        if (m <= stop.rse_tol) {
            trace.status = RunStatus::converged;
            trace.iterations = k;
            break;
        }
        if (k == stop.max_iters) {
            trace.iterations = k;
        }
    }
    trace.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    trace.final_rse = m;
    trace.final_x = std::move(x);
    return trace;
}

}  // namespace kaczmarz::solvers

#include "kaczmarz/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <future>
#include <set>
#include <sstream>
#include <stdexcept>

namespace kaczmarz::bench {

namespace {

std::string fmt9(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

const char* status_name(solvers::RunStatus s) {
    switch (s) {
        case solvers::RunStatus::converged: return "converged";
        case solvers::RunStatus::max_iters: return "max_iters";
        case solvers::RunStatus::error: return "error";
    }
    return "?";
}

}  // namespace

BenchReport run_bench(const problems::ProblemInstance& instance,
                      const BenchParams& params) {
    if (params.trials < 1) {
        throw std::invalid_argument("run_bench: trials must be >= 1");
    }
    if (params.algorithms.empty()) {
        throw std::invalid_argument("run_bench: no algorithms selected");
    }

    const linalg::Vector x0(instance.a.cols(), 0.0);
    solvers::StopRule stop;
    stop.rse_tol = params.rse_tol;
    stop.max_iters = params.max_iters;
    stop.reference = instance.x_min_norm;

    solvers::RunOptions opts;
    opts.diagnostics = false;
    opts.record_trace = params.record_traces;

    BenchReport report;
    report.parallel_timing = params.parallel;

    for (const SolverKind kind : params.algorithms) {
        AlgoResult result;
        result.kind = kind;
        result.trials.resize(params.trials);
        if (params.record_traces) {
            result.traces.resize(params.trials);
        }

        const auto run_trial = [&](std::size_t t) {
            const std::uint64_t seed =
                sampling::derive_seed(params.base_seed, t);
            solvers::RunTrace trace = solvers::run(kind, instance.a, instance.b,
                                                   x0, stop, seed, opts);
            double cpu_s = trace.elapsed_s;
            for (std::size_t rep = 1; rep < params.timing_repeats; ++rep) {
                solvers::RunOptions silent = opts;
                silent.record_trace = false;
                const auto again = solvers::run(kind, instance.a, instance.b,
                                                x0, stop, seed, silent);
                cpu_s = std::min(cpu_s, again.elapsed_s);
            }
            result.trials[t] = {t, trace.iterations, cpu_s, trace.status};
            if (params.record_traces) {
                result.traces[t] = std::move(trace);
            }
        };

        if (params.parallel) {
            std::vector<std::future<void>> futures;
            futures.reserve(params.trials);
            for (std::size_t t = 0; t < params.trials; ++t) {
                futures.push_back(
                    std::async(std::launch::async, run_trial, t));
            }
            for (auto& f : futures) {
                f.get();
            }
        } else {
            for (std::size_t t = 0; t < params.trials; ++t) {
                run_trial(t);
            }
        }

        double it_sum = 0.0;
        double cpu_sum = 0.0;
        std::size_t converged = 0;
        for (const TrialRecord& rec : result.trials) {
            if (rec.status == solvers::RunStatus::converged) {
                it_sum += static_cast<double>(rec.iterations);
                cpu_sum += rec.cpu_s;
                ++converged;
            } else {
                ++result.nonconverged;
            }
        }
        if (converged > 0) {
            result.mean_iterations = it_sum / static_cast<double>(converged);
            result.mean_cpu_s = cpu_sum / static_cast<double>(converged);
        }
        report.algorithms.push_back(std::move(result));
    }

    const AlgoResult* tsk = nullptr;
    const AlgoResult* mirk = nullptr;
    for (const AlgoResult& r : report.algorithms) {
        if (r.kind == SolverKind::tsk) tsk = &r;
        if (r.kind == SolverKind::mirk) mirk = &r;
    }
    if (tsk && mirk && mirk->mean_cpu_s > 0.0) {
        report.speedup = tsk->mean_cpu_s / mirk->mean_cpu_s;
    }
    return report;
}

std::string summary_csv(const BenchReport& report) {
    std::ostringstream out;
    if (report.parallel_timing) {
        out << "# timing_caveat=parallel\n";
    }
    const bool with_speedup = report.speedup.has_value();
    out << "algorithm,mean_it,mean_cpu_s,trials,nonconverged";
    if (with_speedup) {
        out << ",speedup_vs_tsk";
    }
    out << "\n";
    for (const AlgoResult& r : report.algorithms) {
        out << solvers::to_string(r.kind) << ',' << fmt9(r.mean_iterations) << ','
            << fmt9(r.mean_cpu_s) << ',' << r.trials.size() << ','
            << r.nonconverged;
        if (with_speedup) {
            out << ',';
            if (r.kind == SolverKind::mirk) {
                out << fmt9(*report.speedup);
            }
        }
        out << "\n";
    }
    return out.str();
}

std::string trials_csv(const BenchReport& report) {
    std::ostringstream out;
    out << "algorithm,trial,iterations,cpu_s,status\n";
    for (const AlgoResult& r : report.algorithms) {
        for (const TrialRecord& rec : r.trials) {
            out << solvers::to_string(r.kind) << ',' << rec.trial << ','
                << rec.iterations << ',' << fmt9(rec.cpu_s) << ','
                << status_name(rec.status) << "\n";
        }
    }
    return out.str();
}

std::string trace_csv(const BenchReport& report) {
    // Collect diagnostic column names (sorted) so every row has the same shape.
    std::set<std::string> diag_cols;
    bool any_diag = false;
    for (const AlgoResult& r : report.algorithms) {
        if (r.traces.empty()) {
            throw std::invalid_argument(
                "trace_csv: traces were not recorded for " +
                solvers::to_string(r.kind));
        }
        for (const auto& trace : r.traces) {
            for (const auto& rec : trace.records) {
                if (rec.diag) {
                    any_diag = true;
                    for (const auto& [name, value] : rec.diag->identity_residuals) {
                        diag_cols.insert(name);
                    }
                }
            }
        }
    }

    std::ostringstream out;
    out << "algorithm,trial,k,rse,seconds";
    if (any_diag) {
        out << ",mu,inertial_coeff,residual_used,fallback";
        for (const std::string& name : diag_cols) {
            out << ',' << name;
        }
    }
    out << "\n";
    for (const AlgoResult& r : report.algorithms) {
        for (std::size_t t = 0; t < r.traces.size(); ++t) {
            double prev_rse = -1.0;
            for (const auto& rec : r.traces[t].records) {
                if (rec.k == 0) {
                    prev_rse = rec.rse;
                    continue;
                }
                if (prev_rse >= 0.0 && rec.rse > prev_rse * (1.0 + 1e-9) + 1e-300) {
                    throw std::runtime_error(
                        "trace_csv: rse increased within a run of " +
                        solvers::to_string(r.kind));
                }
                prev_rse = rec.rse;
                out << solvers::to_string(r.kind) << ',' << t << ',' << rec.k
                    << ',' << fmt9(rec.rse) << ',' << fmt9(rec.seconds);
                if (any_diag) {
                    if (rec.diag) {
                        out << ',' << fmt9(rec.diag->mu) << ','
                            << fmt9(rec.diag->inertial_coeff) << ','
                            << fmt9(rec.diag->residual_used) << ','
                            << (rec.diag->fallback ? 1 : 0);
                        for (const std::string& name : diag_cols) {
                            out << ',';
                            const auto it = rec.diag->identity_residuals.find(name);
                            if (it != rec.diag->identity_residuals.end()) {
                                out << fmt9(it->second);
                            }
                        }
                    } else {
                        out << ",,,,";
                        for (std::size_t i = 0; i < diag_cols.size(); ++i) {
                            out << ',';
                        }
                    }
                }
                out << "\n";
            }
        }
    }
    return out.str();
}

void trace_export(const BenchReport& report, const std::string& path) {
    linalg::write_text_file(path, trace_csv(report));
}

SweepResult sweep(const problems::GenSpec& base_gen, const std::string& param,
                  std::span<const double> values, const BenchParams& params) {
    if (values.empty()) {
        throw std::invalid_argument("sweep: empty value list");
    }
    if (param != "c" && param != "rows" && param != "cols") {
        throw std::invalid_argument("sweep: unknown parameter " + param);
    }
    SweepResult result;
    result.param = param;
    for (const double v : values) {
        problems::GenSpec gen = base_gen;
        if (param == "c") {
            gen.c = v;
        } else if (param == "rows") {
            gen.rows = static_cast<std::size_t>(v);
        } else {
            gen.cols = static_cast<std::size_t>(v);
        }
        const problems::ProblemInstance instance = problems::generate(gen);
        result.entries.push_back({v, run_bench(instance, params)});
    }
    return result;
}

std::string sweep_csv(const SweepResult& result) {
    std::ostringstream out;
    bool with_speedup = false;
    for (const SweepEntry& e : result.entries) {
        with_speedup = with_speedup || e.report.speedup.has_value();
    }
    out << "sweep_param,sweep_value,algorithm,mean_it,mean_cpu_s,trials,nonconverged";
    if (with_speedup) {
        out << ",speedup_vs_tsk";
    }
    out << "\n";
    for (const SweepEntry& e : result.entries) {
        for (const AlgoResult& r : e.report.algorithms) {
            out << result.param << ',' << fmt9(e.value) << ','
                << solvers::to_string(r.kind) << ',' << fmt9(r.mean_iterations)
                << ',' << fmt9(r.mean_cpu_s) << ',' << r.trials.size() << ','
                << r.nonconverged;
            if (with_speedup) {
                out << ',';
                if (r.kind == SolverKind::mirk && e.report.speedup) {
                    out << fmt9(*e.report.speedup);
                }
            }
            out << "\n";
        }
    }
    return out.str();
}

}  // namespace kaczmarz::bench

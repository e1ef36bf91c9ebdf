#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kaczmarz/problems.hpp"
#include "kaczmarz/solvers.hpp"

namespace kaczmarz::bench {

using solvers::SolverKind;

struct BenchParams {
    std::vector<SolverKind> algorithms{SolverKind::tsk, SolverKind::mirk};
    std::size_t trials = 50;
    double rse_tol = 1e-6;
    std::size_t max_iters = 10'000'000;
    std::uint64_t base_seed = sampling::kDefaultSeed;
    bool parallel = false;       // run trials concurrently (timing caveat)
    bool record_traces = false;  // keep per-iteration traces for export
    // Re-run each seeded trial this many times and keep the smallest wall
    // time. Iteration counts come from the (deterministic) run itself; the
    // minimum strips scheduler noise from short trials.
    std::size_t timing_repeats = 1;
};

struct TrialRecord {
    std::size_t trial = 0;
    std::size_t iterations = 0;
    double cpu_s = 0.0;
    solvers::RunStatus status = solvers::RunStatus::error;
};

struct AlgoResult {
    SolverKind kind;
    std::vector<TrialRecord> trials;          // ordered by trial index
    std::vector<solvers::RunTrace> traces;    // only when record_traces
    double mean_iterations = 0.0;             // over converged trials
    double mean_cpu_s = 0.0;
    std::size_t nonconverged = 0;
};

struct BenchReport {
    std::vector<AlgoResult> algorithms;
    std::optional<double> speedup;  // mean CPU of tsk / mean CPU of mirk
    bool parallel_timing = false;
};

//
// Run every algorithm on the same instance for `trials` seeded runs. Trial t
// of every algorithm uses the seed derived from (base_seed, t), so iteration
// counts are reproducible; only CPU columns vary between invocations. Timing
// covers the iteration loop only. Non-converged trials are excluded from the
// means and counted.
//
BenchReport run_bench(const problems::ProblemInstance& instance,
                      const BenchParams& params);

/// Summary CSV: algorithm,mean_it,mean_cpu_s,trials,nonconverged[,speedup_vs_tsk].
/// The speed-up column appears only when both tsk and mirk ran; its value is
/// on the mirk row. Floats carry 9 significant digits.
std::string summary_csv(const BenchReport& report);

/// Per-trial CSV: algorithm,trial,iterations,cpu_s,status.
std::string trials_csv(const BenchReport& report);

/// Trace CSV: algorithm,trial,k,rse,seconds (plus diagnostic columns when
/// present), rows ordered by (algorithm, trial, k), k >= 1. Verifies that the
/// rse column is nonincreasing within each run.
std::string trace_csv(const BenchReport& report);
void trace_export(const BenchReport& report, const std::string& path);

struct SweepEntry {
    double value = 0.0;
    BenchReport report;
};

struct SweepResult {
    std::string param;  // "c", "rows" or "cols"
    std::vector<SweepEntry> entries;
};

/// One bench per value of the varied generator parameter; everything else is
/// held fixed (including the generator seed).
SweepResult sweep(const problems::GenSpec& base_gen, const std::string& param,
                  std::span<const double> values, const BenchParams& params);

/// Sweep CSV: the summary schema with leading sweep_param,sweep_value columns.
std::string sweep_csv(const SweepResult& result);

}  // namespace kaczmarz::bench

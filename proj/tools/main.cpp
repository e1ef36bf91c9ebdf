#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kaczmarz/bench.hpp"
#include "kaczmarz/problems.hpp"
#include "kaczmarz/solvers.hpp"
#include "kaczmarz/spectral.hpp"

namespace {

using namespace kaczmarz;

std::vector<solvers::SolverKind> parse_algos(const std::string& csv) {
    std::vector<solvers::SolverKind> kinds;
    std::istringstream in(csv);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (!tok.empty()) {
            kinds.push_back(solvers::parse_solver_kind(tok));
        }
    }
    if (kinds.empty()) {
        throw std::invalid_argument("no algorithms given");
    }
    return kinds;
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> values;
    std::istringstream in(csv);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (!tok.empty()) {
            values.push_back(std::stod(tok));
        }
    }
    return values;
}

std::string fmt9(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

void print_kv(const char* key, const std::string& value) {
    std::printf("%-16s %s\n", key, value.c_str());
}

int cmd_bounds(const std::string& problem, bool csv) {
    const problems::ProblemInstance p = problems::load(problem);
    const auto profile = spectral::compute_profile(p.a);
    const auto bounds = spectral::rate_bounds(profile);
    bool ordering = false;
    bool ordering_defined = profile.rank >= 2;
    if (ordering_defined) {
        ordering = spectral::bound_ordering_condition(profile.rank, p.a.rows());
    }

    if (csv) {
        std::printf(
            "rank,lambda_min_nz,fro_sq,alpha_f,upsilon,coherence_min,"
            "coherence_max,d_const,rk_factor,tsk_factor,airk_factor,"
            "mirk_factor,bound_ordering\n");
        std::printf("%zu,%s,%s,%s,%s,%s,%s,%s,%s,%s,%s,%s,%s\n", profile.rank,
                    fmt9(profile.lambda_min_nz).c_str(), fmt9(profile.fro_sq).c_str(),
                    fmt9(profile.alpha_f).c_str(), fmt9(profile.upsilon).c_str(),
                    fmt9(profile.coherence_min).c_str(),
                    fmt9(profile.coherence_max).c_str(), fmt9(profile.d_const).c_str(),
                    fmt9(bounds.rk_factor).c_str(), fmt9(bounds.tsk_factor).c_str(),
                    fmt9(bounds.airk_factor).c_str(), fmt9(bounds.mirk_factor).c_str(),
                    ordering_defined ? (ordering ? "holds" : "fails") : "n/a");
        return 0;
    }

    print_kv("rank", std::to_string(profile.rank));
    print_kv("lambda_min_nz", fmt9(profile.lambda_min_nz));
    print_kv("fro_sq", fmt9(profile.fro_sq));
    print_kv("alpha_f", fmt9(profile.alpha_f));
    print_kv("upsilon", fmt9(profile.upsilon));
    print_kv("coherence_min", fmt9(profile.coherence_min));
    print_kv("coherence_max", fmt9(profile.coherence_max));
    print_kv("d_const", fmt9(profile.d_const));
    print_kv("rk_factor", fmt9(bounds.rk_factor));
    print_kv("tsk_factor", fmt9(bounds.tsk_factor));
    print_kv("airk_factor", fmt9(bounds.airk_factor));
    print_kv("mirk_factor", fmt9(bounds.mirk_factor));
    print_kv("bound_ordering",
             ordering_defined ? (ordering ? "holds" : "fails") : "n/a");
    if (profile.near_parallel_rows()) {
        std::printf(
            "warning: coherence_max is 1 to machine precision; some pair of "
            "rows is parallel and the two-row bound degenerates\n");
    }
    return 0;
}

void print_summary(const bench::BenchReport& report) {
    std::printf("%-6s %14s %14s %8s %13s\n", "algo", "mean_it", "mean_cpu_s",
                "trials", "nonconverged");
    for (const auto& r : report.algorithms) {
        std::printf("%-6s %14s %14s %8zu %13zu\n",
                    solvers::to_string(r.kind).c_str(),
                    fmt9(r.mean_iterations).c_str(), fmt9(r.mean_cpu_s).c_str(),
                    r.trials.size(), r.nonconverged);
    }
    if (report.speedup) {
        std::printf("speedup (tsk cpu / mirk cpu): %s\n", fmt9(*report.speedup).c_str());
    }
    if (report.parallel_timing) {
        std::printf("note: trials ran concurrently; cpu columns are indicative only\n");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Randomized Kaczmarz solvers for coherent linear systems: generator, "
        "solver, rate-bound calculator and benchmark harness"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a problem instance");
    problems::GenSpec gen_spec;
    std::string gen_out;
    bool gen_raw = false;
    gen->add_option("--rows", gen_spec.rows, "Number of equations")
        ->capture_default_str();
    gen->add_option("--cols", gen_spec.cols, "Number of unknowns")
        ->capture_default_str();
    gen->add_option("--c", gen_spec.c,
                    "Lower endpoint of the uniform entry interval [c,1); c < 1")
        ->capture_default_str();
    gen->add_option("--seed", gen_spec.seed, "Generator seed")
        ->envname("KACZMARZ_SEED")
        ->capture_default_str();
    gen->add_flag("--raw", gen_raw, "Skip row standardization");
    gen->add_option("--out", gen_out, "Output path prefix")->required();

    // solve
    auto* solve = app.add_subcommand("solve", "Run one solver on an instance");
    std::string solve_problem, solve_algo, solve_trace_out;
    std::uint64_t solve_seed = sampling::kDefaultSeed;
    bool solve_diag = false;
    double solve_tol = 1e-6;
    std::size_t solve_max_iters = 10'000'000;
    solve->add_option("--problem", solve_problem, "Instance path prefix")
        ->required();
    solve->add_option("--algo", solve_algo, "One of rk, tsk, airk, mirk")
        ->required();
    solve->add_option("--seed", solve_seed, "Sampling seed")
        ->envname("KACZMARZ_SEED")
        ->capture_default_str();
    solve->add_flag("--diag", solve_diag,
                    "Record per-step diagnostics and identity checks");
    solve->add_option("--rse-tol", solve_tol, "Stopping tolerance on the RSE")
        ->capture_default_str();
    solve->add_option("--max-iters", solve_max_iters, "Iteration budget")
        ->capture_default_str();
    solve->add_option("--trace-out", solve_trace_out, "Trace CSV path");

    // bounds
    auto* bounds_cmd =
        app.add_subcommand("bounds", "Print spectral constants and rate bounds");
    std::string bounds_problem;
    bool bounds_csv = false;
    bounds_cmd->add_option("--problem", bounds_problem, "Instance path prefix")
        ->required();
    bounds_cmd->add_flag("--csv", bounds_csv, "Emit one CSV header + row");

    // bench / sweep share most flags
    auto* bench_cmd = app.add_subcommand("bench", "Repeated-trial benchmark");
    auto* sweep_cmd =
        app.add_subcommand("sweep", "Benchmark over a swept generator parameter");
    struct BenchFlags {
        std::string problem;
        problems::GenSpec gen;
        bool raw = false;
        std::string algos = "tsk,mirk";
        bench::BenchParams params;
        std::string out;
        std::string trace_out;
    };
    BenchFlags bf, sf;
    for (auto [cmd, flags] : {std::pair{bench_cmd, &bf}, std::pair{sweep_cmd, &sf}}) {
        if (cmd == bench_cmd) {
            cmd->add_option("--problem", flags->problem,
                            "Instance path prefix (generated when omitted)");
        }
        cmd->add_option("--rows", flags->gen.rows, "Rows when generating")
            ->capture_default_str();
        cmd->add_option("--cols", flags->gen.cols, "Cols when generating")
            ->capture_default_str();
        cmd->add_option("--c", flags->gen.c, "Entry interval endpoint (c < 1)")
            ->capture_default_str();
        cmd->add_option("--gen-seed", flags->gen.seed, "Generator seed")
            ->capture_default_str();
        cmd->add_flag("--raw", flags->raw, "Skip standardization");
        cmd->add_option("--algos", flags->algos,
                        "Comma-separated subset of rk,tsk,airk,mirk")
            ->capture_default_str();
        cmd->add_option("--trials", flags->params.trials, "Trials per algorithm")
            ->capture_default_str();
        cmd->add_option("--rse-tol", flags->params.rse_tol, "Stopping tolerance")
            ->capture_default_str();
        cmd->add_option("--max-iters", flags->params.max_iters, "Iteration budget")
            ->capture_default_str();
        cmd->add_option("--seed", flags->params.base_seed,
                        "Base seed for per-trial streams")
            ->envname("KACZMARZ_SEED")
            ->capture_default_str();
        cmd->add_flag("--parallel", flags->params.parallel,
                      "Run trials concurrently (CPU columns become indicative)");
        cmd->add_option("--out", flags->out, "Summary CSV path");
        if (cmd == bench_cmd) {
            cmd->add_option("--trace-out", flags->trace_out,
                            "Per-iteration trace CSV path");
        }
    }
    std::string sweep_param = "c";
    std::string sweep_values = "0.9,0.5,0.1,-0.4";
    sweep_cmd->add_option("--param", sweep_param, "One of c, rows, cols")
        ->capture_default_str();
    sweep_cmd->add_option("--values", sweep_values, "Comma-separated values")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (gen->parsed()) {
            gen_spec.standardize = !gen_raw;
            const problems::ProblemInstance p = problems::generate(gen_spec);
            problems::save(p, gen_out);
            std::printf("wrote %s.{manifest,A.txt,b.txt,xstar.txt,xdag.txt}\n",
                        gen_out.c_str());
            return 0;
        }
        if (solve->parsed()) {
            const problems::ProblemInstance p = problems::load(solve_problem);
            const auto kind = solvers::parse_solver_kind(solve_algo);
            solvers::StopRule stop;
            stop.rse_tol = solve_tol;
            stop.max_iters = solve_max_iters;
            stop.reference = p.x_min_norm;
            solvers::RunOptions opts;
            opts.diagnostics = solve_diag;
            opts.record_trace = true;
            const solvers::RunTrace trace = solvers::run(
                kind, p.a, p.b, linalg::Vector(p.a.cols(), 0.0), stop,
                solve_seed, opts);
            if (!solve_trace_out.empty()) {
                bench::BenchReport single;
                bench::AlgoResult result;
                result.kind = kind;
                result.trials = {{0, trace.iterations, trace.elapsed_s,
                                  trace.status}};
                result.traces = {trace};
                single.algorithms.push_back(std::move(result));
                bench::trace_export(single, solve_trace_out);
            }
            std::printf("status=%s iterations=%zu rse=%s seconds=%s\n",
                        trace.status == solvers::RunStatus::converged
                            ? "converged"
                            : (trace.status == solvers::RunStatus::max_iters
                                   ? "max_iters"
                                   : "error"),
                        trace.iterations, fmt9(trace.final_rse).c_str(),
                        fmt9(trace.elapsed_s).c_str());
            if (trace.status == solvers::RunStatus::converged) return 0;
            if (trace.status == solvers::RunStatus::max_iters) return 2;
            return 1;
        }
        if (bounds_cmd->parsed()) {
            return cmd_bounds(bounds_problem, bounds_csv);
        }
        if (bench_cmd->parsed()) {
            bf.params.algorithms = parse_algos(bf.algos);
            bf.params.record_traces = !bf.trace_out.empty();
            bf.gen.standardize = !bf.raw;
            const problems::ProblemInstance p =
                bf.problem.empty() ? problems::generate(bf.gen)
                                   : problems::load(bf.problem);
            const bench::BenchReport report = bench::run_bench(p, bf.params);
            print_summary(report);
            if (!bf.out.empty()) {
                linalg::write_text_file(bf.out, bench::summary_csv(report));
            }
            if (!bf.trace_out.empty()) {
                bench::trace_export(report, bf.trace_out);
            }
            return 0;
        }
        if (sweep_cmd->parsed()) {
            sf.params.algorithms = parse_algos(sf.algos);
            sf.gen.standardize = !sf.raw;
            const std::vector<double> values = parse_values(sweep_values);
            const bench::SweepResult result =
                bench::sweep(sf.gen, sweep_param, values, sf.params);
            for (const auto& entry : result.entries) {
                std::printf("-- %s = %s --\n", result.param.c_str(),
                            fmt9(entry.value).c_str());
                print_summary(entry.report);
            }
            if (!sf.out.empty()) {
                linalg::write_text_file(sf.out, bench::sweep_csv(result));
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}

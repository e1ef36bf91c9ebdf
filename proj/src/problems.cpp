#include "kaczmarz/problems.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "kaczmarz/spectral.hpp"

namespace kaczmarz::problems {

using sampling::RngStream;

namespace {

void check_consistency(const DenseMatrix& a, const Vector& x, const Vector& b,
                       double tol_scale) {
    const double res = linalg::norm(linalg::residual(a, x, b));
    if (res > tol_scale * (1.0 + linalg::norm(b))) {
        throw std::runtime_error("problem instance is inconsistent (residual " +
                                 linalg::format_real(res) + ")");
    }
}

}  // namespace

ProblemInstance generate(const GenSpec& spec) {
    if (spec.rows < 2 || spec.cols < 1) {
        throw std::invalid_argument("generate: need rows >= 2 and cols >= 1");
    }
    if (!(spec.c < 1.0)) {
        throw std::invalid_argument("generate: entry interval requires c < 1");
    }
    RngStream rng(spec.seed);
    const double width = 1.0 - spec.c;
    Vector data(spec.rows * spec.cols);
    for (double& v : data) {
        v = spec.c + width * rng.uniform();
    }
    Vector x_star(spec.cols);
    for (double& v : x_star) {
        v = rng.uniform();
    }

    // b before any scaling; rescaling a row rescales its entry of b with it,
    // which keeps the solution set intact.
    Vector b(spec.rows, 0.0);
    for (std::size_t i = 0; i < spec.rows; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < spec.cols; ++j) {
            acc += data[i * spec.cols + j] * x_star[j];
        }
        b[i] = acc;
    }

    if (spec.standardize) {
        for (std::size_t i = 0; i < spec.rows; ++i) {
            double w = 0.0;
            for (std::size_t j = 0; j < spec.cols; ++j) {
                const double v = data[i * spec.cols + j];
                w += v * v;
            }
            if (w <= 0.0) {
                throw std::runtime_error("generate: degenerate zero row");
            }
            const double inv = 1.0 / std::sqrt(w);
            for (std::size_t j = 0; j < spec.cols; ++j) {
                data[i * spec.cols + j] *= inv;
            }
            b[i] *= inv;
        }
    }

    DenseMatrix a(spec.rows, spec.cols, std::move(data));
    Vector x_dag = spectral::min_norm_solution(a, b);
    check_consistency(a, x_star, b, 1e-10);

    ProblemInstance p{std::move(a), std::move(b), std::move(x_star),
                      std::move(x_dag), spec, spec.standardize};
    return p;
}

ProblemInstance from_parts(DenseMatrix a, Vector b) {
    Vector x_dag = spectral::min_norm_solution(a, b);
    GenSpec spec;
    spec.rows = a.rows();
    spec.cols = a.cols();
    spec.c = 0.0;
    spec.seed = 0;
    const bool standardized = linalg::is_standardized(a, 1e-12);
    spec.standardize = standardized;
    return ProblemInstance{std::move(a), std::move(b), {}, std::move(x_dag),
                           spec, standardized};
}

std::vector<CoherenceRow> coherence_of_c(std::span<const double> c_values,
                                         std::size_t rows, std::size_t cols,
                                         std::size_t trials,
                                         std::uint64_t base_seed) {
    std::vector<CoherenceRow> table;
    table.reserve(c_values.size());
    for (std::size_t ci = 0; ci < c_values.size(); ++ci) {
        CoherenceRow row{c_values[ci], 0.0, 0.0};
        for (std::size_t t = 0; t < trials; ++t) {
            GenSpec spec;
            spec.rows = rows;
            spec.cols = cols;
            spec.c = c_values[ci];
            spec.seed = sampling::derive_seed(base_seed, ci * trials + t);
            const ProblemInstance p = generate(spec);
            const auto profile = spectral::compute_profile(p.a);
            row.mean_coherence_min += profile.coherence_min;
            row.mean_coherence_max += profile.coherence_max;
        }
        row.mean_coherence_min /= static_cast<double>(trials);
        row.mean_coherence_max /= static_cast<double>(trials);
        table.push_back(row);
    }
    return table;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

void save(const ProblemInstance& p, const std::string& prefix) {
    if (p.x_star.empty()) {
        throw std::invalid_argument("save: instance has no planted solution");
    }
    const std::string a_text = linalg::matrix_to_text(p.a);
    const std::string b_text = linalg::vector_to_text(p.b);
    const std::string xs_text = linalg::vector_to_text(p.x_star);
    const std::string xd_text = linalg::vector_to_text(p.x_min_norm);
    const std::uint64_t checksum =
        fnv1a64(a_text + b_text + xs_text + xd_text);

    std::ostringstream manifest;
    manifest << "I=" << p.a.rows() << "\n";
    manifest << "J=" << p.a.cols() << "\n";
    manifest << "c=" << linalg::format_real(p.spec.c) << "\n";
    manifest << "seed=" << p.spec.seed << "\n";
    manifest << "standardized=" << (p.standardized ? 1 : 0) << "\n";
    manifest << "checksum=" << checksum << "\n";

    linalg::write_text_file(prefix + ".A.txt", a_text);
    linalg::write_text_file(prefix + ".b.txt", b_text);
    linalg::write_text_file(prefix + ".xstar.txt", xs_text);
    linalg::write_text_file(prefix + ".xdag.txt", xd_text);
    linalg::write_text_file(prefix + ".manifest", manifest.str());
}

ProblemInstance load(const std::string& prefix) {
    const std::string manifest = linalg::read_text_file(prefix + ".manifest");
    std::map<std::string, std::string> kv;
    std::istringstream in(manifest);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (!line.empty()) {
                throw std::runtime_error("malformed manifest line: " + line);
            }
            continue;
        }
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    for (const char* key : {"I", "J", "c", "seed", "standardized", "checksum"}) {
        if (!kv.count(key)) {
            throw std::runtime_error(std::string("manifest missing key: ") + key);
        }
    }

    const std::string a_text = linalg::read_text_file(prefix + ".A.txt");
    const std::string b_text = linalg::read_text_file(prefix + ".b.txt");
    const std::string xs_text = linalg::read_text_file(prefix + ".xstar.txt");
    const std::string xd_text = linalg::read_text_file(prefix + ".xdag.txt");

    const std::uint64_t expect = std::stoull(kv.at("checksum"));
    const std::uint64_t actual = fnv1a64(a_text + b_text + xs_text + xd_text);
    if (expect != actual) {
        throw std::runtime_error("checksum mismatch: files do not match manifest");
    }

    DenseMatrix a = linalg::matrix_from_text(a_text);
    Vector b = linalg::vector_from_text(b_text);
    Vector x_star = linalg::vector_from_text(xs_text);
    Vector x_dag = linalg::vector_from_text(xd_text);

    GenSpec spec;
    spec.rows = std::stoull(kv.at("I"));
    spec.cols = std::stoull(kv.at("J"));
    spec.c = std::stod(kv.at("c"));
    spec.seed = std::stoull(kv.at("seed"));
    spec.standardize = kv.at("standardized") == "1";

    if (a.rows() != spec.rows || a.cols() != spec.cols ||
        b.size() != a.rows() || x_star.size() != a.cols() ||
        x_dag.size() != a.cols()) {
        throw std::runtime_error("dimension mismatch between manifest and data");
    }
    check_consistency(a, x_dag, b, 1e-8);

    return ProblemInstance{std::move(a), std::move(b), std::move(x_star),
                           std::move(x_dag), spec, spec.standardize};
}

}  // namespace kaczmarz::problems

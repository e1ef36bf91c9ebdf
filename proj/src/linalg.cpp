#include "kaczmarz/linalg.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kaczmarz::linalg {

double dot(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) {
        throw std::invalid_argument("dot: length mismatch");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        sum += u[i] * v[i];
    }
    return sum;
}

double norm_sq(std::span<const double> u) {
    double sum = 0.0;
    for (double x : u) {
        sum += x * x;
    }
    return sum;
}

double norm(std::span<const double> u) { return std::sqrt(norm_sq(u)); }

void axpy(Vector& y, double alpha, std::span<const double> x) {
    if (y.size() != x.size()) {
        throw std::invalid_argument("axpy: length mismatch");
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] += alpha * x[i];
    }
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, Vector data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows_ == 0 || cols_ == 0) {
        throw std::invalid_argument("DenseMatrix: rows and cols must be >= 1");
    }
    if (data_.size() != rows_ * cols_) {
        throw std::invalid_argument("DenseMatrix: data size does not match shape");
    }
    for (double x : data_) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument("DenseMatrix: non-finite entry");
        }
    }
    row_sq_norms_.resize(rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        const double w = norm_sq(row(i));
        if (w <= 0.0) {
            throw std::invalid_argument("DenseMatrix: zero row at index " +
                                        std::to_string(i));
        }
        row_sq_norms_[i] = w;
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    Vector data(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        data[i * n + i] = 1.0;
    }
    return DenseMatrix(n, n, std::move(data));
}

std::span<const double> DenseMatrix::row(std::size_t i) const {
    if (i >= rows_) {
        throw std::out_of_range("DenseMatrix::row: index out of range");
    }
    return std::span<const double>(data_).subspan(i * cols_, cols_);
}

double DenseMatrix::row_sq_norm(std::size_t i) const {
    if (i >= rows_) {
        throw std::out_of_range("DenseMatrix::row_sq_norm: index out of range");
    }
    return row_sq_norms_[i];
}

Hyperplane::Hyperplane(std::span<const double> v, double d)
    : Hyperplane(v, d, norm_sq(v)) {}

Hyperplane::Hyperplane(std::span<const double> v, double d, double v_sq)
    : normal(v), offset(d), normal_sq(v_sq) {
    if (normal_sq <= 0.0) {
        throw std::invalid_argument("Hyperplane: degenerate (zero normal)");
    }
}

Vector project_hyperplane(std::span<const double> u, const Hyperplane& h) {
    Vector z(u.begin(), u.end());
    project_hyperplane_inplace(z, h);
    return z;
}

void project_hyperplane_inplace(Vector& u, const Hyperplane& h) {
    if (u.size() != h.normal.size()) {
        throw std::invalid_argument("project_hyperplane: dimension mismatch");
    }
    const double step = (dot(u, h.normal) - h.offset) / h.normal_sq;
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] -= step * h.normal[i];
    }
}

double frobenius_sq(const DenseMatrix& a) {
    double sum = 0.0;
    for (double w : a.row_sq_norms()) {
        sum += w;
    }
    return sum;
}

Vector multiply(const DenseMatrix& a, std::span<const double> x) {
    if (x.size() != a.cols()) {
        throw std::invalid_argument("multiply: dimension mismatch");
    }
    Vector out(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        out[i] = dot(a.row(i), x);
    }
    return out;
}

Vector multiply_transpose(const DenseMatrix& a, std::span<const double> y) {
    if (y.size() != a.rows()) {
        throw std::invalid_argument("multiply_transpose: dimension mismatch");
    }
    Vector out(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto row = a.row(i);
        const double yi = y[i];
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out[j] += yi * row[j];
        }
    }
    return out;
}

Vector residual(const DenseMatrix& a, std::span<const double> x,
                std::span<const double> b) {
    if (b.size() != a.rows()) {
        throw std::invalid_argument("residual: dimension mismatch");
    }
    Vector r = multiply(a, x);
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] -= b[i];
    }
    return r;
}

bool is_standardized(const DenseMatrix& a, double tol) {
    for (double w : a.row_sq_norms()) {
        if (std::abs(std::sqrt(w) - 1.0) > tol) {
            return false;
        }
    }
    return true;
}

std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string matrix_to_text(const DenseMatrix& a) {
    std::string out = std::to_string(a.rows()) + " " + std::to_string(a.cols()) + "\n";
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto row = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (j > 0) out += ' ';
            out += format_real(row[j]);
        }
        out += '\n';
    }
    return out;
}

std::string vector_to_text(std::span<const double> v) {
    std::string out = std::to_string(v.size()) + "\n";
    for (double x : v) {
        out += format_real(x);
        out += '\n';
    }
    return out;
}

namespace {

double parse_real(std::istream& in, const char* what) {
    std::string tok;
    if (!(in >> tok)) {
        throw std::runtime_error(std::string("malformed file: missing ") + what);
    }
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') {
        throw std::runtime_error(std::string("malformed file: bad number '") + tok +
                                 "'");
    }
    return x;
}

std::size_t parse_count(std::istream& in, const char* what) {
    long long n = 0;
    if (!(in >> n) || n < 0) {
        throw std::runtime_error(std::string("malformed file: bad ") + what);
    }
    return static_cast<std::size_t>(n);
}

}  // namespace

DenseMatrix matrix_from_text(const std::string& text) {
    std::istringstream in(text);
    const std::size_t rows = parse_count(in, "row count");
    const std::size_t cols = parse_count(in, "column count");
    Vector data(rows * cols);
    for (std::size_t k = 0; k < data.size(); ++k) {
        data[k] = parse_real(in, "matrix entry");
    }
    std::string extra;
    if (in >> extra) {
        throw std::runtime_error("malformed file: trailing data after matrix");
    }
    return DenseMatrix(rows, cols, std::move(data));
}

Vector vector_from_text(const std::string& text) {
    std::istringstream in(text);
    const std::size_t n = parse_count(in, "vector length");
    Vector v(n);
    for (std::size_t k = 0; k < n; ++k) {
        v[k] = parse_real(in, "vector entry");
    }
    std::string extra;
    if (in >> extra) {
        throw std::runtime_error("malformed file: trailing data after vector");
    }
    return v;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open file: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write file: " + path);
    }
    out << contents;
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
}

DenseMatrix read_matrix(const std::string& path) {
    return matrix_from_text(read_text_file(path));
}

void write_matrix(const std::string& path, const DenseMatrix& a) {
    write_text_file(path, matrix_to_text(a));
}

Vector read_vector(const std::string& path) {
    return vector_from_text(read_text_file(path));
}

void write_vector(const std::string& path, std::span<const double> v) {
    write_text_file(path, vector_to_text(v));
}

}  // namespace kaczmarz::linalg

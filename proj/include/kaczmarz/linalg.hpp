#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace kaczmarz::linalg {

using Vector = std::vector<double>;

/// Inner product of two equal-length vectors.
double dot(std::span<const double> u, std::span<const double> v);

double norm_sq(std::span<const double> u);
double norm(std::span<const double> u);

/// y += alpha * x
void axpy(Vector& y, double alpha, std::span<const double> x);

//
// DenseMatrix: row-major real matrix with per-row squared norms cached at
// construction. Immutable after construction. Rows of zero norm are rejected
// because every sampling law divides by them.
//
class DenseMatrix {
  public:
    DenseMatrix(std::size_t rows, std::size_t cols, Vector data);

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double operator()(std::size_t i, std::size_t j) const {
        return data_[i * cols_ + j];
    }

    /// Read-only view of row i (0-based), no copy.
    std::span<const double> row(std::size_t i) const;

    double row_sq_norm(std::size_t i) const;
    std::span<const double> row_sq_norms() const { return row_sq_norms_; }
    std::span<const double> data() const { return data_; }

  private:
    std::size_t rows_;
    std::size_t cols_;
    Vector data_;
    Vector row_sq_norms_;
};

//
// A hyperplane {x : <x, normal> = offset}. Holds a view of the normal, so the
// referenced storage (typically a matrix row) must outlive the object.
//
struct Hyperplane {
    std::span<const double> normal;
    double offset = 0.0;
    double normal_sq = 0.0;

    Hyperplane(std::span<const double> v, double d);
    Hyperplane(std::span<const double> v, double d, double v_sq);
};

/// Orthogonal projection of u onto h: u - ((<u,v> - d)/|v|^2) v.
Vector project_hyperplane(std::span<const double> u, const Hyperplane& h);
void project_hyperplane_inplace(Vector& u, const Hyperplane& h);

/// Sum of squared row norms.
double frobenius_sq(const DenseMatrix& a);

Vector multiply(const DenseMatrix& a, std::span<const double> x);
Vector multiply_transpose(const DenseMatrix& a, std::span<const double> y);

/// A x - b
Vector residual(const DenseMatrix& a, std::span<const double> x,
                std::span<const double> b);

/// True when every row norm is within tol of 1.
bool is_standardized(const DenseMatrix& a, double tol = 1e-10);

//
// Text formats. Matrix: first line "I J", then I lines of J reals. Vector:
// first line "n", then n reals one per line. Reals are written with 17
// significant digits so a write/read round trip is bit exact. UTF-8, LF.
//
std::string format_real(double x);
std::string matrix_to_text(const DenseMatrix& a);
std::string vector_to_text(std::span<const double> v);
DenseMatrix matrix_from_text(const std::string& text);
Vector vector_from_text(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);
DenseMatrix read_matrix(const std::string& path);
void write_matrix(const std::string& path, const DenseMatrix& a);
Vector read_vector(const std::string& path);
void write_vector(const std::string& path, std::span<const double> v);

}  // namespace kaczmarz::linalg

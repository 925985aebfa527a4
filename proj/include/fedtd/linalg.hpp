#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace fedtd {

using Vector = std::vector<double>;

// Dense row-major matrix. Sizes here are tens of states, so everything is
// plain loops over contiguous storage.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& m);
Matrix multiply(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
Vector multiply(const Matrix& m, std::span<const double> x);
// xᵀM
Vector left_multiply(std::span<const double> x, const Matrix& m);
Matrix matrix_power(const Matrix& m, unsigned exponent);

double norm2(std::span<const double> x);
double norm1(std::span<const double> x);
double norm_inf(std::span<const double> x);

// Throws ParameterError if any entry is NaN or infinite.
void require_finite(std::span<const double> values, const char* what);

// Gaussian elimination with partial pivoting. Throws NumericalError when a
// pivot vanishes.
Vector solve_linear(Matrix a, Vector b);

// Largest singular value via power iteration on MᵀM. Deterministic start.
double spectral_norm(const Matrix& m, double tol = 1e-9);

double frobenius_norm(const Matrix& m);

// Max over rows of |Σ_j m(i,j) - 1|.
double max_row_sum_deviation(const Matrix& m);

// Rows sum to 1 within tol and every entry lies in [0, 1].
bool is_row_stochastic(const Matrix& m, double tol = 1e-12);

}  // namespace fedtd

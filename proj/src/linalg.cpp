#include "fedtd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "fedtd/errors.hpp"
#include "fedtd/random.hpp"

namespace fedtd {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ParameterError("Matrix: ragged initializer list");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ParameterError(std::string(op) + ": shape mismatch");
}

}  // namespace

Matrix operator-(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "operator-");
    Matrix out(a.rows(), a.cols());
    auto lhs = a.data();
    auto rhs = b.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = lhs[i] - rhs[i];
    return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "operator+");
    Matrix out(a.rows(), a.cols());
    auto lhs = a.data();
    auto rhs = b.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = lhs[i] + rhs[i];
    return out;
}

Matrix operator*(double s, const Matrix& m) {
    Matrix out = m;
    for (double& x : out.data()) x *= s;
    return out;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ParameterError("multiply: inner dimension mismatch");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto dst = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            auto src = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += aik * src[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
    return out;
}

Vector multiply(const Matrix& m, std::span<const double> x) {
    if (m.cols() != x.size()) throw ParameterError("multiply: vector length mismatch");
    Vector out(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) acc += r[j] * x[j];
        out[i] = acc;
    }
    return out;
}

Vector left_multiply(std::span<const double> x, const Matrix& m) {
    if (m.rows() != x.size()) throw ParameterError("left_multiply: vector length mismatch");
    Vector out(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) out[j] += x[i] * r[j];
    }
    return out;
}

Matrix matrix_power(const Matrix& m, unsigned exponent) {
    if (!m.square()) throw ParameterError("matrix_power: matrix must be square");
    Matrix result = Matrix::identity(m.rows());
    for (unsigned l = 0; l < exponent; ++l) result = multiply(result, m);
    return result;
}

double norm2(std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return std::sqrt(acc);
}

double norm1(std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) acc += std::abs(v);
    return acc;
}

double norm_inf(std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) acc = std::max(acc, std::abs(v));
    return acc;
}

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values)
        if (!std::isfinite(v)) throw ParameterError(std::string(what) + ": non-finite entry");
}

Vector solve_linear(Matrix a, Vector b) {
    const std::size_t n = a.rows();
    if (!a.square() || b.size() != n) throw ParameterError("solve_linear: dimension mismatch");

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (a(pivot, col) == 0.0 || !std::isfinite(a(pivot, col)))
            throw NumericalError("solve_linear: singular system");
        if (pivot != col) {
            std::swap_ranges(a.row(col).begin(), a.row(col).end(), a.row(pivot).begin());
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = a(r, col) / a(col, col);
            if (factor == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a(r, c) -= factor * a(col, c);
            b[r] -= factor * b[col];
        }
    }

    Vector x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= a(i, c) * x[c];
        x[i] = acc / a(i, i);
    }
    for (double v : x)
        if (!std::isfinite(v)) throw NumericalError("solve_linear: non-finite solution");
    return x;
}

namespace {

// Fixed pseudo-random start. An all-ones start is orthogonal to the row space
// of every zero-row-sum matrix (e.g. P̂ - P), which would report a norm of 0.
Vector power_iteration_start(std::size_t n) {
    Vector v(n);
    std::uint64_t state = 0x5EED5EED5EED5EEDULL;
    for (std::size_t i = 0; i < n; ++i) {
        state = splitmix64(state);
        v[i] = 0.5 + static_cast<double>(state >> 11) * 0x1.0p-53;
    }
    const double nv = norm2(v);
    for (double& x : v) x /= nv;
    return v;
}

}  // namespace

double spectral_norm(const Matrix& m, double tol) {
    require_finite(m.data(), "spectral_norm");
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    if (frobenius_norm(m) == 0.0) return 0.0;

    constexpr int kMaxIterations = 1000;
    Vector v = power_iteration_start(m.cols());
    double estimate = 0.0;  // current estimate of σ²
    for (int it = 0; it < kMaxIterations; ++it) {
        Vector mv = multiply(m, v);
        Vector w = left_multiply(mv, m);  // Mᵀ(Mv)
        const double rayleigh = norm2(mv) * norm2(mv);
        const double nw = norm2(w);
        if (nw == 0.0) {
            // Start vector fell into the null space; perturb deterministically.
            Vector alt = power_iteration_start(m.cols() + 1);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = alt[i + 1] - alt[0] * v[i];
            const double nv = norm2(v);
            for (double& x : v) x /= nv;
            continue;
        }
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / nw;
        // Rayleigh quotients increase monotonically toward σ²; stop well inside tol.
        const bool settled = it > 0 && std::abs(rayleigh - estimate) <= 1e-4 * tol * rayleigh;
        estimate = std::max(estimate, rayleigh);
        if (settled) break;
    }
    // Final Rayleigh quotient with the latest vector.
    Vector mv = multiply(m, v);
    estimate = std::max(estimate, norm2(mv) * norm2(mv));
    return std::sqrt(estimate);
}

double frobenius_norm(const Matrix& m) {
    require_finite(m.data(), "frobenius_norm");
    return norm2(m.data());
}

double max_row_sum_deviation(const Matrix& m) {
    double worst = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double sum = 0.0;
        for (double v : m.row(i)) sum += v;
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

bool is_row_stochastic(const Matrix& m, double tol) {
    if (!m.square() || m.rows() == 0) return false;
    for (double v : m.data())
        if (!(v >= 0.0 && v <= 1.0)) return false;
    return max_row_sum_deviation(m) <= tol;
}

}  // namespace fedtd

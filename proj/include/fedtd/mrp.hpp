#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

#include "fedtd/linalg.hpp"

namespace fedtd {

// Markov reward process induced by a fixed policy.
struct Mrp {
    Matrix transition;  // row-stochastic, n×n
    Vector reward;      // entries in [0, 1]
    double gamma = 0.0; // discount, strictly inside (0, 1)

    std::size_t n_states() const noexcept { return reward.size(); }

    // Throws ParameterError when any invariant is broken.
    void validate() const;
};

// Vector of value estimates V(s), one entry per state.
struct ValueTable {
    Vector values;

    ValueTable() = default;
    explicit ValueTable(std::size_t n, double fill = 0.0) : values(n, fill) {}
    explicit ValueTable(Vector v) : values(std::move(v)) {}

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t s) const noexcept { return values[s]; }
    double& operator[](std::size_t s) noexcept { return values[s]; }
    bool operator==(const ValueTable&) const = default;
};

// e = V_estimate - V_true.
struct ErrorVector {
    Vector values;

    static ErrorVector between(const ValueTable& estimate, const ValueTable& truth);
    double l2() const { return norm2(values); }
};

// Upper end of the value range for rewards in [0,1]: M = 1/(1-gamma).
inline double value_ceiling(double gamma) { return 1.0 / (1.0 - gamma); }

void require_gamma(double gamma);

// Uniform(0,1] entries normalised per row, uniform[0,1] rewards.
Mrp generate_random_mrp(std::size_t n_states, double gamma, std::uint64_t seed);

// Solves (I - γP)V = r.
ValueTable solve_true_value(const Mrp& mrp);

// Fixed point of the Bellman operator for an arbitrary kernel with the same
// rewards and discount, i.e. (I - γK)^{-1} r. This is where TD(0) settles
// when it samples from K instead of the true transition matrix.
ValueTable solve_value_for_kernel(const Matrix& kernel, std::span<const double> reward, double gamma);

// True when the directed graph of positive entries is strongly connected and
// has period 1.
bool is_irreducible_aperiodic(const Matrix& transition);

// Power iteration πᵀ ← πᵀP from the uniform vector. Throws
// ChainStructureError for reducible/periodic chains or when the iteration cap
// 100·n·log(1/tol) is reached.
Vector stationary_distribution(const Matrix& transition, double tol = 1e-13);

}  // namespace fedtd

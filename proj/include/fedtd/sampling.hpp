#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

#include "fedtd/linalg.hpp"
#include "fedtd/random.hpp"

namespace fedtd {

enum class Regime { iid, markov };

// Where i.i.d. start states are drawn from. Markov chains also draw their
// initial state from this distribution.
enum class IidOption { stationary, uniform };

std::string_view to_string(Regime regime);
std::string_view to_string(IidOption option);
Regime parse_regime(std::string_view name);
IidOption parse_iid_option(std::string_view name);

struct Transition {
    std::size_t state = 0;
    double reward = 0.0;
    std::size_t next_state = 0;

    bool operator==(const Transition&) const = default;
};

// Inverse-CDF sampling from one row-stochastic matrix.
class KernelSampler {
public:
    KernelSampler() = default;
    explicit KernelSampler(const Matrix& kernel);

    std::size_t n_states() const noexcept { return n_; }
    std::size_t draw(std::size_t state, double u) const noexcept;

private:
    std::size_t n_ = 0;
    Vector cdf_;                        // n×n cumulative rows
    std::vector<std::size_t> last_positive_;  // fallback when u ≥ cdf_.back()
};

// Per-agent trajectory state. Owns copies of its kernel and rewards so
// samplers can advance on different threads without sharing anything.
class SamplerState {
public:
    SamplerState(Regime regime, const Matrix& kernel, std::span<const double> reward,
                 Vector initial_dist, std::uint64_t seed);

    // Convenience: initial distribution chosen by `option` on `kernel`.
    static SamplerState create(Regime regime, IidOption option, const Matrix& kernel,
                               std::span<const double> reward, std::uint64_t seed);

    Transition next_transition();

    Regime regime() const noexcept { return regime_; }
    std::size_t current_state() const noexcept { return current_state_; }
    const Vector& initial_dist() const noexcept { return initial_dist_; }

private:
    std::size_t draw_initial();

    Regime regime_;
    KernelSampler kernel_;
    Vector reward_;
    Vector initial_dist_;
    Vector initial_cdf_;
    Rng rng_;
    std::size_t current_state_ = 0;
};

Vector initial_distribution(IidOption option, const Matrix& kernel);

// Smallest t with max_s TV(P^t(s,·), π) ≤ epsilon. Throws ChainStructureError
// for reducible/periodic chains or past 10⁶ steps.
std::size_t estimate_mixing_time(const Matrix& kernel, double epsilon);

}  // namespace fedtd

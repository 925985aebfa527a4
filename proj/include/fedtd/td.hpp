#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fedtd/mrp.hpp"
#include "fedtd/sampling.hpp"

namespace fedtd {

struct TdConfig {
    double alpha = 0.01;
    std::size_t total_steps = 0;
    // 0 selects max(1, total_steps / 1000).
    std::size_t log_stride = 0;
    IidOption iid_option = IidOption::stationary;
    // Keep a copy of the value table at every checkpoint.
    bool record_values = false;

    void validate() const;
};

// α = 1/T^η, the constant step size the convergence remarks pair with a
// horizon T.
double step_size_for_horizon(std::size_t horizon, double eta);

std::size_t effective_log_stride(std::size_t total, std::size_t requested);

// Checkpoint grid: stride, 2·stride, …, and always `total` itself.
std::vector<std::size_t> checkpoint_grid(std::size_t total, std::size_t stride);

// V(s) ← V(s) + α[r + γV(s') − V(s)] at s = transition.state only.
ValueTable td_step(const ValueTable& values, const Transition& transition, double alpha, double gamma);

// In-place form used inside the simulation loops; same arithmetic as td_step.
inline void td_update(std::span<double> values, const Transition& tr, double alpha, double gamma) noexcept {
    const double v = values[tr.state];
    values[tr.state] = v + alpha * (tr.reward + gamma * values[tr.next_state] - v);
}

// Throws InvariantViolation unless every entry lies in [0, 1/(1-γ)] (upper
// end with 1e-12 slack).
void check_value_bounds(std::span<const double> values, double gamma, const char* where);

struct ErrorTrace {
    double initial_l2 = 0.0;
    double initial_rmse = 0.0;
    std::vector<std::size_t> steps;
    Vector l2;
    Vector rmse;
    std::vector<ValueTable> values;  // filled when record_values is set

    double final_rmse() const { return rmse.empty() ? initial_rmse : rmse.back(); }
    double final_l2() const { return l2.empty() ? initial_l2 : l2.back(); }
};

// Single-agent TD(0) from V = 0 against `kernel`, errors measured against the
// true value of `mrp`. The sampler is seeded with mix_seed(seed, 0).
ErrorTrace run_single_agent(const Mrp& mrp, const Matrix& kernel, const TdConfig& config, Regime regime,
                            std::uint64_t seed);

// Same loop driven by a caller-owned sampler.
ErrorTrace run_single_agent(const Mrp& mrp, SamplerState& sampler, const TdConfig& config);

}  // namespace fedtd

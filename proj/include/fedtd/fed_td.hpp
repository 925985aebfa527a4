#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fedtd/mrp.hpp"
#include "fedtd/perturbation.hpp"
#include "fedtd/sampling.hpp"
#include "fedtd/td.hpp"

namespace fedtd {

struct FedConfig {
    std::size_t n_agents = 1;
    std::size_t local_steps = 1;  // K
    std::size_t rounds = 0;       // T
    double alpha = 0.01;
    double beta = 1.0;            // (0, 1]
    std::size_t log_stride = 0;   // 0 selects max(1, rounds / 1000)
    IidOption iid_option = IidOption::stationary;
    bool record_values = false;

    // Throws ConfigError. rounds = 0 is allowed and yields an empty trace.
    void validate() const;
    // β = 1 sits outside the open interval the convergence bounds assume.
    bool beta_at_boundary() const noexcept { return beta == 1.0; }
};

// Global estimate, per-agent local copies and the agents' samplers. Samplers
// persist across rounds; Markov chains continue where they stopped.
struct RoundState {
    ValueTable global_values;
    std::vector<ValueTable> local_values;
    std::vector<SamplerState> samplers;

    // Agent i draws from kernels[i] with sampler seed mix_seed(seed, i).
    static RoundState create(const Mrp& mrp, const PerturbedEnsemble& ensemble, Regime regime,
                             IidOption iid_option, std::uint64_t seed);

    std::size_t n_agents() const noexcept { return samplers.size(); }
};

// Sets V_i ← V, applies K TD(0) steps and writes V_i − V into `delta_out`.
void local_round_into(std::size_t agent, RoundState& state, const FedConfig& config, double gamma,
                      std::span<double> delta_out);

// Same, returning the delta V_i − V.
ValueTable local_round(std::size_t agent, RoundState& state, const FedConfig& config, double gamma);

// V + (β/N)·Σ_i delta_i, summed in ascending agent order.
ValueTable server_aggregate(const ValueTable& global_values, std::span<const ValueTable> deltas, double beta);

// Trace over communication rounds. `steps` holds round indices.
ErrorTrace run_fedtd(const Mrp& mrp, const PerturbedEnsemble& ensemble, const FedConfig& config, Regime regime,
                     std::uint64_t seed);

}  // namespace fedtd

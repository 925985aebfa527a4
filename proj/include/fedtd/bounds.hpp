#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "fedtd/linalg.hpp"
#include "fedtd/mrp.hpp"
#include "fedtd/perturbation.hpp"
#include "fedtd/sampling.hpp"

namespace fedtd {

// Inputs to the closed-form error bounds. Which fields a theorem reads:
//   1 (single, iid):    alpha gamma delta_mismatch n_states e0_norm delta_prob
//   2 (single, markov): alpha gamma delta_mismatch n_states e0_norm tau
//   3 (fed, iid):       all of the federated fields plus delta_prob and T
//   4 (fed, markov):    federated fields plus tau (mixing time at ε = β)
struct BoundParams {
    double alpha = 0.01;
    double beta = 0.4;
    double gamma = 0.8;
    std::size_t local_steps = 5;  // K
    std::size_t n_agents = 1;     // N
    std::size_t horizon = 1;      // T
    double delta_mismatch = 0.0;  // Δ
    double lambda_mismatch = 0.0; // Λ
    std::size_t n_states = 1;
    double e0_norm = 0.0;         // ‖V⁽⁰⁾ − V‖₂
    double delta_prob = 0.05;     // δ
    double tau = 1.0;
    double c_p = 1.0;
    double c_mu = 1.0;
};

// Values above this are reported as saturated.
inline constexpr double kBoundCap = 1e12;

struct BoundValue {
    double value = 0.0;
    bool saturated = false;
};

// Individual pieces of the federated bounds, for diagnostics.
struct FedBoundTerms {
    double rho = 0.0;          // (1−β) + β[(1−α)+αγ]^K
    double local_decay = 0.0;  // [1−α(1−γ)]^K
    double c = 0.0;            // exp(K(C_P + C_μ))
    double b1 = 0.0;
    double b2 = 0.0;
};

FedBoundTerms fed_bound_terms(const BoundParams& p);

BoundValue bound_single_iid(double t, const BoundParams& p);
BoundValue bound_single_markov(double t, const BoundParams& p);
BoundValue bound_fed_iid(double t, const BoundParams& p);
BoundValue bound_fed_markov(double t, const BoundParams& p);

// Dispatch by theorem number 1–4.
BoundValue evaluate_bound(int theorem, double t, const BoundParams& p);

std::vector<BoundValue> bound_series(int theorem, std::span<const std::size_t> ts, const BoundParams& p);

// max over l ∈ {0..K} of ‖kernel^l‖₂.
double estimate_power_norm_bounds(const Matrix& kernel, std::size_t local_steps);

// Mixing time used by the Markovian bounds. ε ≥ 1 is trivially met at t = 1.
std::size_t mixing_time_for(const Matrix& kernel, double epsilon);

// Fills Δ, Λ, C_P, C_μ, τ and ‖e⁽⁰⁾‖ from a concrete instance (zero
// initialisation). τ uses ε = α for theorems 1–2 and ε = β for 3–4, maxed
// over agent kernels.
BoundParams derive_bound_params(int theorem, const Mrp& mrp, const PerturbedEnsemble& ensemble, double alpha,
                                double beta, std::size_t local_steps, std::size_t horizon, double delta_prob);

int theorem_for(bool federated, Regime regime);

}  // namespace fedtd

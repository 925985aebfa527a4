#include "fedtd/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedtd/errors.hpp"

namespace fedtd {

namespace {

void require_open_unit(double x, const char* name) {
    if (!(x > 0.0 && x < 1.0)) throw ParameterError(std::string(name) + " must lie strictly inside (0, 1)");
}

void require_nonnegative(double x, const char* name) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw ParameterError(std::string(name) + " must be a nonnegative real");
}

void validate_single(double t, const BoundParams& p) {
    require_open_unit(p.alpha, "alpha");
    require_open_unit(p.gamma, "gamma");
    require_nonnegative(p.delta_mismatch, "delta_mismatch");
    require_nonnegative(p.e0_norm, "e0_norm");
    require_nonnegative(t, "t");
    if (p.n_states < 1) throw ParameterError("n_states must be at least 1");
}

void validate_fed(double t, const BoundParams& p) {
    validate_single(t, p);
    if (!(p.beta > 0.0 && p.beta <= 1.0)) throw ParameterError("beta must lie in (0, 1]");
    if (p.local_steps < 1) throw ParameterError("K must be at least 1");
    if (p.n_agents < 1) throw ParameterError("N must be at least 1");
    require_nonnegative(p.lambda_mismatch, "lambda_mismatch");
    require_nonnegative(p.c_p, "c_p");
    require_nonnegative(p.c_mu, "c_mu");
}

BoundValue capped(double value) {
    if (!std::isfinite(value) || value > kBoundCap) return {kBoundCap, true};
    return {value, false};
}

// Residual from the single agent's model mismatch: γΔ√|S|/(1−γ)².
double single_mismatch_term(const BoundParams& p) {
    const double g = 1.0 - p.gamma;
    return p.gamma * p.delta_mismatch * std::sqrt(static_cast<double>(p.n_states)) / (g * g);
}

// A(x) = √(2(log(1/x) + 1/4))
double concentration_a(double x) { return std::sqrt(2.0 * (std::log(1.0 / x) + 0.25)); }

}  // namespace

FedBoundTerms fed_bound_terms(const BoundParams& p) {
    validate_fed(0.0, p);
    const double k = static_cast<double>(p.local_steps);
    const double g = 1.0 - p.gamma;
    const double sqrt_s = std::sqrt(static_cast<double>(p.n_states));

    FedBoundTerms terms;
    terms.rho = (1.0 - p.beta) + p.beta * std::pow((1.0 - p.alpha) + p.alpha * p.gamma, k);
    terms.local_decay = std::pow(1.0 - p.alpha * g, k);
    terms.c = std::exp(k * (p.c_p + p.c_mu));
    const double denom = 1.0 - terms.local_decay;
    terms.b1 = p.gamma * p.lambda_mismatch * sqrt_s / (g * g * denom);
    terms.b2 = p.gamma * p.gamma * terms.c * p.delta_mismatch * sqrt_s / (g * denom);
    return terms;
}

BoundValue bound_single_iid(double t, const BoundParams& p) {
    validate_single(t, p);
    require_open_unit(p.delta_prob, "delta_prob");
    if (t < 1.0) throw ParameterError("bound_single_iid: t must be at least 1");
    const double g = 1.0 - p.gamma;
    const double contraction = std::pow(1.0 - p.alpha * g, t) * p.e0_norm;
    const double sampling = p.alpha * std::sqrt(t) / g * std::sqrt(32.0 * (std::log(t / p.delta_prob) + 0.25));
    return capped(contraction + single_mismatch_term(p) + sampling);
}

BoundValue bound_single_markov(double t, const BoundParams& p) {
    validate_single(t, p);
    require_nonnegative(p.tau, "tau");
    const double g = 1.0 - p.gamma;
    const double m = value_ceiling(p.gamma);
    const double contraction = std::pow(1.0 - p.alpha * g, t) * p.e0_norm;
    const double mixing = p.alpha / g * (2.0 * m * p.tau + 1.0);
    return capped(contraction + single_mismatch_term(p) + mixing);
}

BoundValue bound_fed_iid(double t, const BoundParams& p) {
    validate_fed(t, p);
    require_open_unit(p.delta_prob, "delta_prob");
    if (p.horizon < 1) throw ParameterError("bound_fed_iid: T must be at least 1");
    const auto terms = fed_bound_terms(p);
    const double sqrt_n = std::sqrt(static_cast<double>(p.n_agents));
    const double a = concentration_a(p.delta_prob / (3.0 * static_cast<double>(p.horizon)));
    const double sampling = 4.0 / sqrt_n * p.beta * p.alpha * std::sqrt(t) *
                            std::sqrt(static_cast<double>(p.local_steps)) * a * a * a / (1.0 - p.gamma);
    return capped(std::pow(terms.rho, t) * p.e0_norm + terms.b1 / sqrt_n + p.alpha * p.alpha * terms.b2 + sampling);
}

BoundValue bound_fed_markov(double t, const BoundParams& p) {
    validate_fed(t, p);
    require_nonnegative(p.tau, "tau");
    const auto terms = fed_bound_terms(p);
    const double sqrt_n = std::sqrt(static_cast<double>(p.n_agents));
    const double g = 1.0 - p.gamma;
    const double mixing = p.beta / g * (2.0 * p.tau / g + t * p.beta);
    return capped(std::pow(terms.rho, t) * p.e0_norm + terms.b1 / sqrt_n + p.alpha * p.alpha * terms.b2 + mixing);
}

BoundValue evaluate_bound(int theorem, double t, const BoundParams& p) {
    switch (theorem) {
        case 1: return bound_single_iid(t, p);
        case 2: return bound_single_markov(t, p);
        case 3: return bound_fed_iid(t, p);
        case 4: return bound_fed_markov(t, p);
        default: throw ParameterError("theorem must be 1, 2, 3 or 4");
    }
}

std::vector<BoundValue> bound_series(int theorem, std::span<const std::size_t> ts, const BoundParams& p) {
    std::vector<BoundValue> out;
    out.reserve(ts.size());
    for (std::size_t t : ts) out.push_back(evaluate_bound(theorem, static_cast<double>(t), p));
    return out;
}

double estimate_power_norm_bounds(const Matrix& kernel, std::size_t local_steps) {
    if (!is_row_stochastic(kernel, 1e-9)) throw ParameterError("estimate_power_norm_bounds: kernel is not row-stochastic");
    double best = 1.0;  // l = 0, the identity
    Matrix power = Matrix::identity(kernel.rows());
    for (std::size_t l = 1; l <= local_steps; ++l) {
        power = multiply(power, kernel);
        best = std::max(best, spectral_norm(power));
    }
    return best;
}

std::size_t mixing_time_for(const Matrix& kernel, double epsilon) {
    if (epsilon >= 1.0) return 1;
    return estimate_mixing_time(kernel, epsilon);
}

int theorem_for(bool federated, Regime regime) {
    if (federated) return regime == Regime::iid ? 3 : 4;
    return regime == Regime::iid ? 1 : 2;
}

BoundParams derive_bound_params(int theorem, const Mrp& mrp, const PerturbedEnsemble& ensemble, double alpha,
                                double beta, std::size_t local_steps, std::size_t horizon, double delta_prob) {
    if (theorem < 1 || theorem > 4) throw ParameterError("theorem must be 1, 2, 3 or 4");
    const bool federated = theorem >= 3;

    BoundParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.gamma = mrp.gamma;
    p.local_steps = local_steps;
    p.n_agents = ensemble.size();
    p.horizon = horizon;
    p.n_states = mrp.n_states();
    p.delta_prob = delta_prob;
    p.e0_norm = norm2(solve_true_value(mrp).values);
    p.delta_mismatch = *std::max_element(ensemble.delta_spectral.begin(), ensemble.delta_spectral.end());
    p.lambda_mismatch = ensemble.lambda_realized;

    const double epsilon = federated ? beta : alpha;
    double tau = 0.0;
    double c_p = 0.0;
    for (const auto& kernel : ensemble.kernels) {
        if (theorem == 2 || theorem == 4) tau = std::max(tau, static_cast<double>(mixing_time_for(kernel, epsilon)));
        if (federated) c_p = std::max(c_p, estimate_power_norm_bounds(kernel, local_steps));
    }
    p.tau = std::max(tau, 1.0);
    p.c_p = federated ? c_p : 1.0;
    p.c_mu = federated ? estimate_power_norm_bounds(mrp.transition, local_steps) : 1.0;
    return p;
}

}  // namespace fedtd

#include "fedtd/fed_td.hpp"

#include <cmath>

#include "fedtd/errors.hpp"
#include "fedtd/random.hpp"

namespace fedtd {

void FedConfig::validate() const {
    if (n_agents < 1) throw ConfigError("N (number of agents) must be at least 1");
    if (local_steps < 1) throw ConfigError("K (local steps) must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie strictly inside (0, 1)");
    if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in (0, 1]");
}

RoundState RoundState::create(const Mrp& mrp, const PerturbedEnsemble& ensemble, Regime regime,
                              IidOption iid_option, std::uint64_t seed) {
    RoundState state;
    state.global_values = ValueTable(mrp.n_states(), 0.0);
    state.local_values.assign(ensemble.size(), state.global_values);
    state.samplers.reserve(ensemble.size());
    for (std::size_t i = 0; i < ensemble.size(); ++i)
        state.samplers.push_back(
            SamplerState::create(regime, iid_option, ensemble.kernels[i], mrp.reward, mix_seed(seed, i)));
    return state;
}

void local_round_into(std::size_t agent, RoundState& state, const FedConfig& config, double gamma,
                      std::span<double> delta_out) {
    auto& local = state.local_values[agent].values;
    const auto& global = state.global_values.values;
    local = global;
    auto& sampler = state.samplers[agent];
    for (std::size_t k = 0; k < config.local_steps; ++k)
        td_update(local, sampler.next_transition(), config.alpha, gamma);
    for (std::size_t s = 0; s < local.size(); ++s) delta_out[s] = local[s] - global[s];
}

ValueTable local_round(std::size_t agent, RoundState& state, const FedConfig& config, double gamma) {
    config.validate();
    if (agent >= state.n_agents()) throw ParameterError("local_round: agent index out of range");
    ValueTable delta(state.global_values.size());
    local_round_into(agent, state, config, gamma, delta.values);
    return delta;
}

namespace {

// deltas is agent-major: deltas[i * n + s].
void aggregate_in_place(std::span<double> global, std::span<const double> deltas, std::size_t n_agents,
                        double beta) {
    const std::size_t n = global.size();
    const double scale = beta / static_cast<double>(n_agents);
    for (std::size_t s = 0; s < n; ++s) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n_agents; ++i) sum += deltas[i * n + s];
        global[s] = global[s] + scale * sum;
    }
}

}  // namespace

ValueTable server_aggregate(const ValueTable& global_values, std::span<const ValueTable> deltas, double beta) {
    if (deltas.empty()) throw ParameterError("server_aggregate: no deltas");
    const std::size_t n = global_values.size();
    Vector packed;
    packed.reserve(deltas.size() * n);
    for (const auto& d : deltas) {
        if (d.size() != n) throw ParameterError("server_aggregate: delta length mismatch");
        packed.insert(packed.end(), d.values.begin(), d.values.end());
    }
    ValueTable out = global_values;
    aggregate_in_place(out.values, packed, deltas.size(), beta);
    return out;
}

ErrorTrace run_fedtd(const Mrp& mrp, const PerturbedEnsemble& ensemble, const FedConfig& config, Regime regime,
                     std::uint64_t seed) {
    config.validate();
    mrp.validate();
    if (ensemble.size() != config.n_agents)
        throw ConfigError("run_fedtd: ensemble size differs from N");

    const ValueTable truth = solve_true_value(mrp);
    const double gamma = mrp.gamma;
    const std::size_t n = mrp.n_states();
    const double sqrt_n = std::sqrt(static_cast<double>(n));

    RoundState state = RoundState::create(mrp, ensemble, regime, config.iid_option, seed);
    Vector deltas(config.n_agents * n, 0.0);

    ErrorTrace trace;
    trace.initial_l2 = ErrorVector::between(state.global_values, truth).l2();
    trace.initial_rmse = trace.initial_l2 / sqrt_n;
    const auto grid = checkpoint_grid(config.rounds, effective_log_stride(config.rounds, config.log_stride));
    trace.steps = grid;
    trace.l2.reserve(grid.size());
    trace.rmse.reserve(grid.size());

    std::size_t round = 0;
    for (std::size_t checkpoint : grid) {
        for (; round < checkpoint; ++round) {
            for (std::size_t i = 0; i < config.n_agents; ++i)
                local_round_into(i, state, config, gamma, std::span<double>(deltas).subspan(i * n, n));
            aggregate_in_place(state.global_values.values, deltas, config.n_agents, config.beta);
        }
        check_value_bounds(state.global_values.values, gamma, "run_fedtd global");
        for (const auto& local : state.local_values) check_value_bounds(local.values, gamma, "run_fedtd local");
        const double l2 = ErrorVector::between(state.global_values, truth).l2();
        trace.l2.push_back(l2);
        trace.rmse.push_back(l2 / sqrt_n);
        if (config.record_values) trace.values.push_back(state.global_values);
    }
    return trace;
}

}  // namespace fedtd

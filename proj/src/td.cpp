#include "fedtd/td.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedtd/errors.hpp"
#include "fedtd/random.hpp"

namespace fedtd {

void TdConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie strictly inside (0, 1)");
}

double step_size_for_horizon(std::size_t horizon, double eta) {
    if (horizon < 1) throw ParameterError("step_size_for_horizon: horizon must be at least 1");
    if (!(eta > 0.0)) throw ParameterError("step_size_for_horizon: eta must be positive");
    return 1.0 / std::pow(static_cast<double>(horizon), eta);
}

std::size_t effective_log_stride(std::size_t total, std::size_t requested) {
    if (requested > 0) return requested;
    return std::max<std::size_t>(1, total / 1000);
}

std::vector<std::size_t> checkpoint_grid(std::size_t total, std::size_t stride) {
    if (stride == 0) throw ParameterError("checkpoint_grid: stride must be positive");
    std::vector<std::size_t> grid;
    grid.reserve(total / stride + 1);
    for (std::size_t t = stride; t <= total; t += stride) grid.push_back(t);
    if (total > 0 && (grid.empty() || grid.back() != total)) grid.push_back(total);
    return grid;
}

ValueTable td_step(const ValueTable& values, const Transition& transition, double alpha, double gamma) {
    if (transition.state >= values.size() || transition.next_state >= values.size())
        throw ParameterError("td_step: state index out of range");
    ValueTable next = values;
    td_update(next.values, transition, alpha, gamma);
    return next;
}

void check_value_bounds(std::span<const double> values, double gamma, const char* where) {
    const double ceiling = value_ceiling(gamma) + 1e-12;
    for (std::size_t s = 0; s < values.size(); ++s) {
        if (!(values[s] >= 0.0 && values[s] <= ceiling))
            throw InvariantViolation(std::string(where) + ": value " + std::to_string(values[s]) + " at state " +
                                     std::to_string(s) + " outside [0, 1/(1-gamma)]");
    }
}

ErrorTrace run_single_agent(const Mrp& mrp, SamplerState& sampler, const TdConfig& config) {
    config.validate();
    mrp.validate();
    const ValueTable truth = solve_true_value(mrp);
    const double gamma = mrp.gamma;
    const double sqrt_n = std::sqrt(static_cast<double>(mrp.n_states()));

    ErrorTrace trace;
    ValueTable values(mrp.n_states(), 0.0);
    trace.initial_l2 = ErrorVector::between(values, truth).l2();
    trace.initial_rmse = trace.initial_l2 / sqrt_n;

    const auto grid = checkpoint_grid(config.total_steps, effective_log_stride(config.total_steps, config.log_stride));
    trace.steps = grid;
    trace.l2.reserve(grid.size());
    trace.rmse.reserve(grid.size());

    std::size_t t = 0;
    for (std::size_t checkpoint : grid) {
        for (; t < checkpoint; ++t) td_update(values.values, sampler.next_transition(), config.alpha, gamma);
        check_value_bounds(values.values, gamma, "run_single_agent");
        const double l2 = ErrorVector::between(values, truth).l2();
        trace.l2.push_back(l2);
        trace.rmse.push_back(l2 / sqrt_n);
        if (config.record_values) trace.values.push_back(values);
    }
    return trace;
}

ErrorTrace run_single_agent(const Mrp& mrp, const Matrix& kernel, const TdConfig& config, Regime regime,
                            std::uint64_t seed) {
    config.validate();
    auto sampler = SamplerState::create(regime, config.iid_option, kernel, mrp.reward, mix_seed(seed, 0));
    return run_single_agent(mrp, sampler, config);
}

}  // namespace fedtd

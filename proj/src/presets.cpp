#include "fedtd/presets.hpp"

#include "fedtd/errors.hpp"

namespace fedtd {

namespace {

// |S| = 10, γ = 0.8, T = 10⁵, 5 seeds.
ExperimentConfig base(std::string name) {
    ExperimentConfig c;
    c.name = std::move(name);
    c.n_states = 10;
    c.gamma = 0.8;
    c.rounds = 100000;
    c.seeds = {0, 1, 2, 3, 4};
    c.alpha = 0.01;
    c.beta = 0.4;
    c.local_steps = 5;
    c.regime = Regime::markov;
    c.iid_option = IidOption::uniform;
    return c;
}

const std::vector<double> kDeltas{0.01, 0.1, 0.5, 1.0};
const std::vector<double> kAgents{1, 10, 20, 100};

ExperimentConfig delta_sweep(std::string name, std::size_t n_agents, Regime regime) {
    auto c = base(std::move(name));
    c.n_agents = n_agents;
    c.regime = regime;
    c.iid_option = regime == Regime::iid ? IidOption::stationary : IidOption::uniform;
    c.sweep = SweepDimension::delta;
    c.sweep_values = kDeltas;
    return c;
}

ExperimentConfig agent_sweep(std::string name, double delta, double alpha) {
    auto c = base(std::move(name));
    c.delta = delta;
    c.alpha = alpha;
    c.sweep = SweepDimension::n_agents;
    c.sweep_values = kAgents;
    return c;
}

}  // namespace

const std::vector<std::string>& figure_ids() {
    static const std::vector<std::string> ids{"fig1", "fig2", "fig3", "fig4", "app_d1", "app_d2", "app_d3"};
    return ids;
}

std::vector<ExperimentConfig> figure_preset(std::string_view id) {
    std::vector<ExperimentConfig> sets;
    if (id == "fig1") {
        sets.push_back(delta_sweep("fig1_iid", 10, Regime::iid));
        sets.push_back(delta_sweep("fig1_markov", 10, Regime::markov));
    } else if (id == "fig2") {
        sets.push_back(agent_sweep("fig2_delta_0.1", 0.1, 0.01));
        sets.push_back(agent_sweep("fig2_delta_1.0", 1.0, 0.01));
    } else if (id == "fig3") {
        // Left panel: N sweep for several step sizes (Δ = 0.1, K = 5).
        for (double alpha : {0.01, 0.05, 0.1})
            sets.push_back(agent_sweep("fig3_left_alpha_" + format_real(alpha), 0.1, alpha));
        // Right panel: K sweep at N = 20.
        auto k = base("fig3_right_K");
        k.n_agents = 20;
        k.delta = 0.1;
        k.sweep = SweepDimension::local_steps;
        k.sweep_values = {1, 5, 10};
        sets.push_back(k);
    } else if (id == "fig4") {
        auto a = base("fig4_left_alpha");
        a.n_agents = 20;
        a.delta = 0.1;
        a.beta = 0.1;
        a.sweep = SweepDimension::alpha;
        a.sweep_values = {0.005, 0.01, 0.05, 0.1};
        sets.push_back(a);
        auto b = base("fig4_right_beta");
        b.n_agents = 20;
        b.delta = 0.1;
        b.sweep = SweepDimension::beta;
        b.sweep_values = {0.1, 0.4, 0.7, 1.0};
        sets.push_back(b);
    } else if (id == "app_d1") {
        for (double n : kAgents) {
            const auto agents = static_cast<std::size_t>(n);
            sets.push_back(delta_sweep("app_d1_iid_N_" + std::to_string(agents), agents, Regime::iid));
        }
    } else if (id == "app_d2") {
        for (double n : kAgents) {
            const auto agents = static_cast<std::size_t>(n);
            sets.push_back(delta_sweep("app_d2_markov_N_" + std::to_string(agents), agents, Regime::markov));
        }
    } else if (id == "app_d3") {
        for (double delta : kDeltas)
            sets.push_back(agent_sweep("app_d3_delta_" + format_real(delta), delta, 0.01));
    } else {
        throw ConfigError("unknown figure id '" + std::string(id) + "'");
    }
    return sets;
}

}  // namespace fedtd

#include "cli.hpp"

#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "fedtd/fedtd.hpp"

namespace fedtd::cli {

namespace {

struct GlobalFlags {
    std::uint64_t seed = 0;
    std::string out_dir = "results";
    unsigned threads = 1;
    std::string log_level = "info";
};

struct ExperimentFlags {
    std::string name;
    std::size_t n_states = 10;
    double gamma = 0.8;
    double alpha = 0.01;
    double beta = 0.4;
    std::size_t n_agents = 10;
    std::size_t local_steps = 5;
    std::size_t rounds = 100000;
    double delta = 0.1;
    std::string regime = "markov";
    std::string iid_option = "stationary";
    std::string norm = "frobenius";
    std::size_t seed_count = 5;
    std::vector<std::uint64_t> seed_list;
    std::size_t log_stride = 0;
    bool emit_bounds = false;
    double delta_prob = 0.05;
};

struct SweepFlags {
    std::string dimension = "delta";
    std::vector<double> values;
};

struct BoundFlags {
    int theorem = 1;
    std::size_t t_max = 1000;
    std::size_t t_stride = 1;
    double lambda = 0.0;
    double e0 = -1.0;  // negative: derive from --from-instance or default 0
    double tau = 1.0;
    double c_p = 1.0;
    double c_mu = 1.0;
    std::optional<std::size_t> horizon;
    bool from_instance = false;
};

struct ReproFlags {
    std::string figure;
    std::optional<std::size_t> rounds;
    std::optional<std::size_t> seed_count;
    bool emit_bounds = false;
};

void add_experiment_flags(CLI::App& cmd, ExperimentFlags& f, const char* default_name) {
    f.name = default_name;
    cmd.add_option("--name", f.name, "Experiment name (results/<name>/)")->capture_default_str();
    cmd.add_option("--n-states", f.n_states, "Number of states |S|")->capture_default_str();
    cmd.add_option("--gamma", f.gamma, "Discount factor in (0,1)")->capture_default_str();
    cmd.add_option("--alpha", f.alpha, "TD step size in (0,1)")->capture_default_str();
    cmd.add_option("--beta", f.beta, "Federated parameter in (0,1]")->capture_default_str();
    cmd.add_option("--N", f.n_agents, "Number of agents")->capture_default_str();
    cmd.add_option("--K", f.local_steps, "Local TD steps per round")->capture_default_str();
    cmd.add_option("--T", f.rounds, "Communication rounds")->capture_default_str();
    cmd.add_option("--delta", f.delta, "Model mismatch level")->capture_default_str();
    cmd.add_option("--regime", f.regime, "Sampling regime")
        ->check(CLI::IsMember({"iid", "markov"}))
        ->capture_default_str();
    cmd.add_option("--iid-option", f.iid_option, "Start-state distribution")
        ->check(CLI::IsMember({"stationary", "uniform"}))
        ->capture_default_str();
    cmd.add_option("--norm", f.norm, "Norm used to enforce the mismatch level")
        ->check(CLI::IsMember({"frobenius", "spectral"}))
        ->capture_default_str();
    auto* count = cmd.add_option("--seeds", f.seed_count, "Number of seeds (0..n-1)")->capture_default_str();
    cmd.add_option("--seed-list", f.seed_list, "Explicit seed values")->delimiter(',')->excludes(count);
    cmd.add_option("--log-stride", f.log_stride, "Rounds between logged points (0 = T/1000)")
        ->capture_default_str();
    cmd.add_flag("--emit-bounds", f.emit_bounds, "Add the matching theorem's bound column");
    cmd.add_option("--delta-prob", f.delta_prob, "Failure probability for high-probability bounds")
        ->capture_default_str();
}

std::vector<std::uint64_t> seeds_from(const ExperimentFlags& f) {
    if (!f.seed_list.empty()) return f.seed_list;
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < f.seed_count; ++i) seeds.push_back(i);
    return seeds;
}

ExperimentConfig to_config(const ExperimentFlags& f, const GlobalFlags& g) {
    ExperimentConfig c;
    c.name = f.name;
    c.n_states = f.n_states;
    c.gamma = f.gamma;
    c.alpha = f.alpha;
    c.beta = f.beta;
    c.n_agents = f.n_agents;
    c.local_steps = f.local_steps;
    c.rounds = f.rounds;
    c.delta = f.delta;
    c.regime = parse_regime(f.regime);
    c.iid_option = parse_iid_option(f.iid_option);
    c.norm_kind = parse_norm_kind(f.norm);
    c.seeds = seeds_from(f);
    c.master_seed = g.seed;
    c.log_stride = f.log_stride;
    c.emit_bounds = f.emit_bounds;
    c.delta_prob = f.delta_prob;
    return c;
}

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Validation failures map to exit 2, everything after that to exit 1.
template <typename Fn>
auto validated(Fn&& fn) {
    try {
        return fn();
    } catch (const ParameterError& e) {
        throw UsageError(e.what());
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
}

int run_experiments(const std::vector<ExperimentConfig>& configs, const GlobalFlags& g, std::ostream& out,
                    spdlog::logger& log) {
    SweepOptions options;
    options.threads = g.threads;
    options.output_dir = g.out_dir;
    int status = kExitOk;
    for (const auto& config : configs) {
        log.info("running '{}': {} cell(s) x {} seed(s), T={}", config.name, config.n_cells(), config.seeds.size(),
                 config.rounds);
        for (const auto& record : run_sweep(config, options)) {
            out << record.csv_path.string() << '\n';
            if (record.failure) {
                log.error("cell {} of '{}' failed: {}", record.cell_index, config.name, *record.failure);
                status = kExitRuntime;
            }
        }
    }
    return status;
}

int cmd_bounds(const BoundFlags& b, const ExperimentFlags& f, const GlobalFlags& g, std::ostream& out,
               spdlog::logger& log) {
    BoundParams params = validated([&] {
        if (b.theorem < 1 || b.theorem > 4) throw ParameterError("--theorem must be 1, 2, 3 or 4");
        if (b.t_max < 1) throw ParameterError("--t-max must be at least 1");
        if (b.t_stride < 1) throw ParameterError("--t-stride must be at least 1");
        const auto horizon = b.horizon.value_or(b.t_max);
        BoundParams p;
        if (b.from_instance) {
            const Mrp mrp = generate_random_mrp(f.n_states, f.gamma, mrp_seed_for(g.seed, 0));
            const auto ensemble = build_ensemble(mrp, b.theorem >= 3 ? f.n_agents : 1, f.delta,
                                                 parse_norm_kind(f.norm), ensemble_seed_for(g.seed, 0, 0));
            p = derive_bound_params(b.theorem, mrp, ensemble, f.alpha, f.beta, f.local_steps, horizon, f.delta_prob);
        } else {
            p.alpha = f.alpha;
            p.beta = f.beta;
            p.gamma = f.gamma;
            p.local_steps = f.local_steps;
            p.n_agents = f.n_agents;
            p.horizon = horizon;
            p.delta_mismatch = f.delta;
            p.lambda_mismatch = b.lambda;
            p.n_states = f.n_states;
            p.e0_norm = std::max(b.e0, 0.0);
            p.delta_prob = f.delta_prob;
            p.tau = b.tau;
            p.c_p = b.c_p;
            p.c_mu = b.c_mu;
        }
        if (b.e0 >= 0.0) p.e0_norm = b.e0;
        evaluate_bound(b.theorem, static_cast<double>(b.t_stride), p);  // surfaces domain errors early
        return p;
    });

    const auto grid = checkpoint_grid(b.t_max, b.t_stride);
    const auto series = bound_series(b.theorem, grid, params);

    const std::filesystem::path dir = std::filesystem::path(g.out_dir) / "bounds";
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    const std::string stem = "bounds_thm" + std::to_string(b.theorem) + "_n_" + std::to_string(params.n_states) +
                             "_N_" + std::to_string(params.n_agents) + "_Delta_" + format_real(params.delta_mismatch) +
                             "_gamma_" + format_real(params.gamma) + "_alpha_" + format_real(params.alpha) +
                             "_beta_" + format_real(params.beta) + "_T_" + std::to_string(params.horizon) + "_K_" +
                             std::to_string(params.local_steps);
    const auto csv = dir / (stem + ".csv");
    std::ofstream file(csv, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open " + csv.string() + " for writing");
    file << "t,bound_thm" << b.theorem << ",saturated\n";
    for (std::size_t k = 0; k < grid.size(); ++k)
        file << grid[k] << ',' << format_real(series[k].value) << ',' << (series[k].saturated ? 1 : 0) << '\n';
    if (!file) throw IoError("write failed for " + csv.string());

    nlohmann::json meta = {{"theorem", b.theorem},
                           {"alpha", params.alpha},
                           {"beta", params.beta},
                           {"gamma", params.gamma},
                           {"K", params.local_steps},
                           {"N", params.n_agents},
                           {"T", params.horizon},
                           {"delta_mismatch", params.delta_mismatch},
                           {"lambda_mismatch", params.lambda_mismatch},
                           {"n_states", params.n_states},
                           {"e0_norm", params.e0_norm},
                           {"delta_prob", params.delta_prob},
                           {"tau", params.tau},
                           {"c_p", params.c_p},
                           {"c_mu", params.c_mu},
                           {"version", library_version()}};
    if (b.theorem >= 3) {
        const auto terms = fed_bound_terms(params);
        meta["rho"] = terms.rho;
        meta["B1"] = terms.b1;
        meta["B2"] = terms.b2;
        meta["C"] = terms.c;
    }
    auto sidecar = csv;
    sidecar.replace_extension(".json");
    std::ofstream(sidecar, std::ios::binary | std::ios::trunc) << meta.dump(2) << '\n';
    log.info("theorem {} bound over {} points", b.theorem, grid.size());
    out << csv.string() << '\n';
    return kExitOk;
}

int cmd_inspect(const ExperimentFlags& f, const GlobalFlags& g, std::ostream& out, spdlog::logger& log) {
    auto [mrp, ensemble] = validated([&] {
        Mrp m = generate_random_mrp(f.n_states, f.gamma, mrp_seed_for(g.seed, 0));
        auto e = build_ensemble(m, f.n_agents, f.delta, parse_norm_kind(f.norm), ensemble_seed_for(g.seed, 0, 0));
        return std::pair{std::move(m), std::move(e)};
    });

    auto matrix_json = [](const Matrix& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
        return rows;
    };
    nlohmann::json agents = nlohmann::json::array();
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        agents.push_back({{"delta_realized", ensemble.delta_realized[i]},
                          {"delta_spectral", ensemble.delta_spectral[i]},
                          {"mixing_time_alpha", mixing_time_for(ensemble.kernels[i], f.alpha)},
                          {"power_norm_bound", estimate_power_norm_bounds(ensemble.kernels[i], f.local_steps)},
                          {"perturbed_value", solve_value_for_kernel(ensemble.kernels[i], mrp.reward, mrp.gamma).values}});
    }
    nlohmann::json doc = {{"n_states", mrp.n_states()},
                          {"gamma", mrp.gamma},
                          {"transition", matrix_json(mrp.transition)},
                          {"reward", mrp.reward},
                          {"true_value", solve_true_value(mrp).values},
                          {"stationary", stationary_distribution(mrp.transition)},
                          {"mixing_time_alpha", mixing_time_for(mrp.transition, f.alpha)},
                          {"power_norm_bound", estimate_power_norm_bounds(mrp.transition, f.local_steps)},
                          {"ensemble",
                           {{"N", ensemble.size()},
                            {"delta_target", ensemble.delta_target},
                            {"norm_kind", to_string(ensemble.norm_kind)},
                            {"lambda_realized", ensemble.lambda_realized},
                            {"agents", agents}}},
                          {"version", library_version()}};

    const std::filesystem::path dir = std::filesystem::path(g.out_dir) / "inspect";
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    const auto path = dir / ("inspect_n_" + std::to_string(mrp.n_states()) + "_N_" + std::to_string(ensemble.size()) +
                             "_Delta_" + format_real(f.delta) + "_seed_" + std::to_string(g.seed) + ".json");
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open " + path.string() + " for writing");
    file << doc.dump(2) << '\n';
    log.info("wrote instance summary for {} states, {} agents", mrp.n_states(), ensemble.size());
    out << path.string() << '\n';
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Federated TD(0) under model mismatch: simulations, sweeps and bounds", "fedtd"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(library_version()));

    GlobalFlags g;
    app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "Output directory")->envname("FEDTD_OUT_DIR")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--log-level", g.log_level, "Diagnostics level on stderr")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}))
        ->capture_default_str();

    ExperimentFlags run_flags;
    auto* run_cmd = app.add_subcommand("run", "Run one FedTD(0) configuration over several seeds");
    add_experiment_flags(*run_cmd, run_flags, "run");

    ExperimentFlags sweep_flags;
    SweepFlags sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one of delta, N, K, alpha, beta");
    add_experiment_flags(*sweep_cmd, sweep_flags, "sweep");
    sweep_cmd->add_option("--sweep", sweep.dimension, "Swept dimension")
        ->check(CLI::IsMember({"delta", "N", "K", "alpha", "beta"}))
        ->capture_default_str();
    sweep_cmd->add_option("--values", sweep.values, "Comma-separated sweep values")->delimiter(',')->required();

    ExperimentFlags bound_exp;
    BoundFlags bounds;
    auto* bounds_cmd = app.add_subcommand("bounds", "Evaluate a theorem's error bound as a function of t");
    add_experiment_flags(*bounds_cmd, bound_exp, "bounds");
    bounds_cmd->add_option("--theorem", bounds.theorem, "Theorem 1-4")->required();
    bounds_cmd->add_option("--t-max", bounds.t_max, "Last t")->capture_default_str();
    bounds_cmd->add_option("--t-stride", bounds.t_stride, "Spacing of t values")->capture_default_str();
    bounds_cmd->add_option("--lambda", bounds.lambda, "Ensemble mismatch Lambda")->capture_default_str();
    bounds_cmd->add_option("--e0", bounds.e0, "Initial error norm ||e(0)||_2");
    bounds_cmd->add_option("--tau", bounds.tau, "Mixing time")->capture_default_str();
    bounds_cmd->add_option("--c-p", bounds.c_p, "Power-norm bound of the agent kernels")->capture_default_str();
    bounds_cmd->add_option("--c-mu", bounds.c_mu, "Power-norm bound of the true kernel")->capture_default_str();
    bounds_cmd->add_option("--horizon", bounds.horizon, "T used inside A(delta/(3T)); defaults to --t-max");
    bounds_cmd->add_flag("--from-instance", bounds.from_instance,
                         "Measure Delta, Lambda, tau, C_P, C_mu and e0 on a generated instance");

    ReproFlags repro;
    auto* repro_cmd = app.add_subcommand("repro", "Reproduce a figure preset");
    repro_cmd->add_option("figure", repro.figure, "Figure id")->required()->check(CLI::IsMember(figure_ids()));
    repro_cmd->add_option("--T", repro.rounds, "Override the number of rounds");
    repro_cmd->add_option("--seeds", repro.seed_count, "Override the number of seeds");
    repro_cmd->add_flag("--emit-bounds", repro.emit_bounds, "Add bound columns");

    ExperimentFlags inspect_flags;
    auto* inspect_cmd = app.add_subcommand("inspect", "Write a JSON summary of a generated instance");
    add_experiment_flags(*inspect_cmd, inspect_flags, "inspect");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    auto sink = std::make_shared<spdlog::sinks::ostream_sink_st>(err);
    spdlog::logger log("fedtd", sink);
    log.set_pattern("[%l] %v");
    log.set_level(spdlog::level::from_str(g.log_level));

    try {
        if (*run_cmd) {
            const auto config = validated([&] {
                auto c = to_config(run_flags, g);
                c.validate();
                return c;
            });
            return run_experiments({config}, g, out, log);
        }
        if (*sweep_cmd) {
            const auto config = validated([&] {
                auto c = to_config(sweep_flags, g);
                c.sweep = parse_sweep_dimension(sweep.dimension);
                c.sweep_values = sweep.values;
                c.validate();
                return c;
            });
            return run_experiments({config}, g, out, log);
        }
        if (*bounds_cmd) return cmd_bounds(bounds, bound_exp, g, out, log);
        if (*repro_cmd) {
            auto configs = validated([&] {
                auto sets = figure_preset(repro.figure);
                for (auto& c : sets) {
                    c.master_seed = g.seed;
                    if (repro.rounds) c.rounds = *repro.rounds;
                    if (repro.seed_count) {
                        c.seeds.clear();
                        for (std::size_t i = 0; i < *repro.seed_count; ++i) c.seeds.push_back(i);
                    }
                    c.emit_bounds = repro.emit_bounds;
                    c.validate();
                }
                return sets;
            });
            return run_experiments(configs, g, out, log);
        }
        if (*inspect_cmd) return cmd_inspect(inspect_flags, g, out, log);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace fedtd::cli

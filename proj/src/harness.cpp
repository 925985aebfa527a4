#include "fedtd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <thread>

#include <json.hpp>

#include "fedtd/errors.hpp"
#include "fedtd/random.hpp"

#ifndef FEDTD_VERSION
#define FEDTD_VERSION "0.0.0"
#endif

namespace fedtd {

std::string_view library_version() { return FEDTD_VERSION; }

std::string_view to_string(SweepDimension dim) {
    switch (dim) {
        case SweepDimension::delta: return "delta";
        case SweepDimension::n_agents: return "N";
        case SweepDimension::local_steps: return "K";
        case SweepDimension::alpha: return "alpha";
        case SweepDimension::beta: return "beta";
    }
    return "delta";
}

SweepDimension parse_sweep_dimension(std::string_view name) {
    if (name == "delta") return SweepDimension::delta;
    if (name == "N") return SweepDimension::n_agents;
    if (name == "K") return SweepDimension::local_steps;
    if (name == "alpha") return SweepDimension::alpha;
    if (name == "beta") return SweepDimension::beta;
    throw ConfigError("unknown sweep dimension '" + std::string(name) + "' (expected delta, N, K, alpha or beta)");
}

std::string_view to_string(RewardDist) { return "uniform"; }

namespace {

bool is_count(double v) { return v >= 1.0 && std::floor(v) == v && v < 1e15; }

}  // namespace

void ExperimentConfig::validate() const {
    if (name.empty()) throw ConfigError("experiment name must not be empty");
    if (n_states < 2) throw ParameterError("n_states must be at least 2");
    require_gamma(gamma);
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw ParameterError("delta must be a nonnegative real");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (!(delta_prob > 0.0 && delta_prob < 1.0)) throw ParameterError("delta_prob must lie in (0, 1)");
    for (std::size_t c = 0; c < n_cells(); ++c) {
        const double v = sweep_values.empty() ? 0.0 : sweep_values[c];
        if (!sweep_values.empty() && (sweep == SweepDimension::n_agents || sweep == SweepDimension::local_steps) &&
            !is_count(v))
            throw ConfigError("sweep values for " + std::string(to_string(sweep)) + " must be positive integers");
        cell(c).fed_config().validate();
        if (cell(c).delta < 0.0) throw ParameterError("delta must be a nonnegative real");
    }
}

ExperimentConfig ExperimentConfig::cell(std::size_t index) const {
    ExperimentConfig out = *this;
    if (sweep_values.empty()) return out;
    const double v = sweep_values.at(index);
    switch (sweep) {
        case SweepDimension::delta: out.delta = v; break;
        case SweepDimension::n_agents: out.n_agents = static_cast<std::size_t>(v); break;
        case SweepDimension::local_steps: out.local_steps = static_cast<std::size_t>(v); break;
        case SweepDimension::alpha: out.alpha = v; break;
        case SweepDimension::beta: out.beta = v; break;
    }
    out.sweep_values = {v};
    return out;
}

FedConfig ExperimentConfig::fed_config() const {
    FedConfig fed;
    fed.n_agents = n_agents;
    fed.local_steps = local_steps;
    fed.rounds = rounds;
    fed.alpha = alpha;
    fed.beta = beta;
    fed.log_stride = log_stride;
    fed.iid_option = iid_option;
    return fed;
}

std::uint64_t mrp_seed_for(std::uint64_t master_seed, std::uint64_t seed) {
    return mix_seed(master_seed, {0x4D52500000000000ULL, seed});
}

std::uint64_t ensemble_seed_for(std::uint64_t master_seed, std::size_t cell_index, std::uint64_t seed) {
    return mix_seed(master_seed, {cell_index + 1, seed, 1});
}

std::uint64_t run_seed_for(std::uint64_t master_seed, std::size_t cell_index, std::uint64_t seed) {
    return mix_seed(master_seed, {cell_index + 1, seed, 2});
}

double rmse(const ValueTable& estimate, const ValueTable& truth) {
    if (estimate.size() != truth.size()) throw ParameterError("rmse: length mismatch");
    if (estimate.size() == 0) throw ParameterError("rmse: empty value tables");
    double acc = 0.0;
    for (std::size_t s = 0; s < estimate.size(); ++s) {
        const double d = estimate[s] - truth[s];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(estimate.size()));
}

void aggregate_across_seeds(std::span<const Vector> per_seed, Vector& mean, Vector& stddev) {
    mean.clear();
    stddev.clear();
    if (per_seed.empty()) return;
    const std::size_t len = per_seed.front().size();
    const double n = static_cast<double>(per_seed.size());
    mean.assign(len, 0.0);
    stddev.assign(len, 0.0);
    for (std::size_t k = 0; k < len; ++k) {
        double sum = 0.0;
        for (const auto& series : per_seed) sum += series.at(k);
        const double m = sum / n;
        double sq = 0.0;
        for (const auto& series : per_seed) sq += (series[k] - m) * (series[k] - m);
        mean[k] = m;
        stddev[k] = std::sqrt(sq / n);
    }
}

double tail_mean(std::span<const double> series, double fraction) {
    if (series.empty()) throw ParameterError("tail_mean: empty series");
    const auto count = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(series.size()))), 1, series.size());
    double sum = 0.0;
    for (std::size_t i = series.size() - count; i < series.size(); ++i) sum += series[i];
    return sum / static_cast<double>(count);
}

std::string format_real(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    std::string s(buf, res.ptr);
    if (std::isfinite(x) && s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

std::string record_filename(const ExperimentConfig& c) {
    std::string name = "fedtd_n_" + std::to_string(c.n_states);
    name += "_N_" + std::to_string(c.n_agents);
    name += "_Delta_" + format_real(c.delta);
    name += "_gamma_" + format_real(c.gamma);
    name += "_alpha_" + format_real(c.alpha);
    name += "_beta_" + format_real(c.beta);
    name += "_T_" + std::to_string(c.rounds);
    name += "_K_" + std::to_string(c.local_steps);
    name += "_s_" + std::string(to_string(c.regime));
    name += "_iidopt_" + std::string(to_string(c.iid_option));
    name += "_R_" + std::string(to_string(c.reward_dist));
    return name + ".csv";
}

namespace {

struct SeedResult {
    std::vector<std::size_t> rounds;
    Vector rmse;
    Vector bound_rmse;
    std::vector<bool> bound_saturated;
    SeedSummary summary;
    std::optional<std::string> error;
};

void parallel_for(std::size_t n_tasks, unsigned threads, const std::function<void(std::size_t)>& task) {
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_tasks)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1)) task(i);
        });
}

SeedResult run_seed(const ExperimentConfig& cell, std::size_t cell_index, std::uint64_t seed) {
    SeedResult out;
    out.summary.seed = seed;
    try {
        const Mrp mrp = generate_random_mrp(cell.n_states, cell.gamma, mrp_seed_for(cell.master_seed, seed));
        const PerturbedEnsemble ensemble = build_ensemble(mrp, cell.n_agents, cell.delta, cell.norm_kind,
                                                          ensemble_seed_for(cell.master_seed, cell_index, seed));
        out.summary.max_delta_realized =
            *std::max_element(ensemble.delta_realized.begin(), ensemble.delta_realized.end());
        out.summary.max_delta_spectral =
            *std::max_element(ensemble.delta_spectral.begin(), ensemble.delta_spectral.end());
        out.summary.lambda_realized = ensemble.lambda_realized;

        const ErrorTrace trace =
            run_fedtd(mrp, ensemble, cell.fed_config(), cell.regime, run_seed_for(cell.master_seed, cell_index, seed));
        out.rounds = trace.steps;
        out.rmse = trace.rmse;

        if (cell.emit_bounds) {
            const int theorem = theorem_for(true, cell.regime);
            const BoundParams params = derive_bound_params(theorem, mrp, ensemble, cell.alpha, cell.beta,
                                                           cell.local_steps, cell.rounds, cell.delta_prob);
            const double sqrt_n = std::sqrt(static_cast<double>(cell.n_states));
            for (const auto& b : bound_series(theorem, trace.steps, params)) {
                out.bound_rmse.push_back(b.value / sqrt_n);
                out.bound_saturated.push_back(b.saturated);
            }
        }
    } catch (const std::exception& e) {
        out.error = "seed " + std::to_string(seed) + ": " + e.what();
    }
    return out;
}

RunRecord assemble(const ExperimentConfig& cell, std::size_t cell_index, std::vector<SeedResult>& results) {
    RunRecord record;
    record.config = cell;
    record.cell_index = cell_index;
    record.seeds = cell.seeds;
    for (auto& r : results) {
        if (r.error) {
            record.failure = *r.error;
            break;
        }
    }
    for (auto& r : results) record.seed_summaries.push_back(r.summary);
    if (record.failure) return record;

    record.rounds = results.front().rounds;
    for (auto& r : results) record.per_seed_rmse.push_back(std::move(r.rmse));
    aggregate_across_seeds(record.per_seed_rmse, record.mean_rmse, record.std_rmse);

    if (cell.emit_bounds) {
        record.bound_theorem = theorem_for(true, cell.regime);
        record.bound_rmse.assign(record.rounds.size(), 0.0);
        for (std::size_t k = 0; k < record.rounds.size(); ++k) {
            bool saturated = false;
            for (const auto& r : results) {
                record.bound_rmse[k] = std::max(record.bound_rmse[k], r.bound_rmse[k]);
                saturated = saturated || r.bound_saturated[k];
            }
            if (saturated) ++record.bound_saturated_points;
        }
    }
    return record;
}

}  // namespace

std::vector<RunRecord> run_sweep(const ExperimentConfig& config, const SweepOptions& options) {
    config.validate();
    if (options.threads < 1) throw ConfigError("threads must be at least 1");

    const std::size_t n_cells = config.n_cells();
    const std::size_t n_seeds = config.seeds.size();
    std::vector<ExperimentConfig> cells;
    for (std::size_t c = 0; c < n_cells; ++c) cells.push_back(config.cell(c));

    std::vector<SeedResult> results(n_cells * n_seeds);
    parallel_for(results.size(), options.threads, [&](std::size_t task) {
        const std::size_t c = task / n_seeds;
        results[task] = run_seed(cells[c], c, config.seeds[task % n_seeds]);
    });

    std::vector<RunRecord> records;
    for (std::size_t c = 0; c < n_cells; ++c) {
        std::vector<SeedResult> cell_results(std::make_move_iterator(results.begin() + c * n_seeds),
                                             std::make_move_iterator(results.begin() + (c + 1) * n_seeds));
        records.push_back(assemble(cells[c], c, cell_results));
        if (options.persist) persist_csv(records.back(), options.output_dir / config.name);
    }
    return records;
}

std::string csv_header(const RunRecord& record) {
    std::string header = "round,mean_rmse,std_rmse";
    for (auto seed : record.seeds) header += ",seed_" + std::to_string(seed) + "_rmse";
    if (record.bound_theorem != 0) header += ",bound_thm" + std::to_string(record.bound_theorem);
    return header;
}

namespace {

nlohmann::json config_json(const ExperimentConfig& c) {
    return {
        {"name", c.name},
        {"n_states", c.n_states},
        {"gamma", c.gamma},
        {"alpha", c.alpha},
        {"beta", c.beta},
        {"T", c.rounds},
        {"K", c.local_steps},
        {"N", c.n_agents},
        {"delta", c.delta},
        {"regime", to_string(c.regime)},
        {"iid_option", to_string(c.iid_option)},
        {"reward_dist", to_string(c.reward_dist)},
        {"norm_kind", to_string(c.norm_kind)},
        {"sweep", to_string(c.sweep)},
        {"sweep_values", c.sweep_values},
        {"seeds", c.seeds},
        {"master_seed", c.master_seed},
        {"log_stride", effective_log_stride(c.rounds, c.log_stride)},
        {"emit_bounds", c.emit_bounds},
        {"delta_prob", c.delta_prob},
    };
}

}  // namespace

std::filesystem::path persist_csv(RunRecord& record, const std::filesystem::path& output_dir) {
    std::error_code ec;
    std::filesystem::create_directories(output_dir, ec);
    if (ec) throw IoError("cannot create output directory " + output_dir.string() + ": " + ec.message());

    const auto csv_path = output_dir / record_filename(record.config);
    {
        std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + csv_path.string() + " for writing");
        out << csv_header(record) << '\n';
        for (std::size_t k = 0; k < record.rounds.size(); ++k) {
            out << record.rounds[k] << ',' << format_real(record.mean_rmse[k]) << ','
                << format_real(record.std_rmse[k]);
            for (const auto& series : record.per_seed_rmse) out << ',' << format_real(series[k]);
            if (record.bound_theorem != 0) out << ',' << format_real(record.bound_rmse[k]);
            out << '\n';
        }
        if (!out) throw IoError("write failed for " + csv_path.string());
    }

    auto sidecar_path = csv_path;
    sidecar_path.replace_extension(".json");
    nlohmann::json seeds = nlohmann::json::array();
    for (const auto& s : record.seed_summaries)
        seeds.push_back({{"seed", s.seed},
                         {"max_delta_realized", s.max_delta_realized},
                         {"max_delta_spectral", s.max_delta_spectral},
                         {"lambda_realized", s.lambda_realized}});
    nlohmann::json meta = {
        {"library", "fedtd"},
        {"version", library_version()},
        {"status", record.failure ? "failed" : "ok"},
        {"config", config_json(record.config)},
        {"cell_index", record.cell_index},
        {"beta_at_boundary", record.config.beta == 1.0},
        {"csv", csv_path.filename().string()},
        {"columns", csv_header(record)},
        {"rows", record.rounds.size()},
        {"std_kind", "population"},
        {"ensembles", seeds},
    };
    if (record.failure) meta["error"] = *record.failure;
    if (record.bound_theorem != 0)
        meta["bound"] = {{"theorem", record.bound_theorem},
                         {"column", "bound_thm" + std::to_string(record.bound_theorem)},
                         {"units", "l2 bound divided by sqrt(n_states), max over seeds"},
                         {"delta_prob", record.config.delta_prob},
                         {"cap", kBoundCap},
                         {"saturated_points", record.bound_saturated_points}};
    {
        std::ofstream out(sidecar_path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + sidecar_path.string() + " for writing");
        out << meta.dump(2) << '\n';
        if (!out) throw IoError("write failed for " + sidecar_path.string());
    }

    record.csv_path = csv_path;
    record.sidecar_path = sidecar_path;
    return csv_path;
}

}  // namespace fedtd

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedtd/bounds.hpp"
#include "fedtd/fed_td.hpp"
#include "fedtd/mrp.hpp"
#include "fedtd/perturbation.hpp"
#include "fedtd/sampling.hpp"

namespace fedtd {

std::string_view library_version();

enum class SweepDimension { delta, n_agents, local_steps, alpha, beta };
enum class RewardDist { uniform };

std::string_view to_string(SweepDimension dim);
SweepDimension parse_sweep_dimension(std::string_view name);
std::string_view to_string(RewardDist dist);

struct ExperimentConfig {
    std::string name = "run";
    std::size_t n_states = 10;
    double gamma = 0.8;
    double alpha = 0.01;
    double beta = 0.4;
    std::size_t rounds = 100000;  // T
    std::size_t local_steps = 5;  // K
    std::size_t n_agents = 10;    // N
    double delta = 0.1;           // Δ
    Regime regime = Regime::markov;
    IidOption iid_option = IidOption::stationary;
    RewardDist reward_dist = RewardDist::uniform;
    NormKind norm_kind = NormKind::frobenius;

    // Exactly one swept dimension. An empty value list runs the base values
    // as a single cell.
    SweepDimension sweep = SweepDimension::delta;
    std::vector<double> sweep_values;

    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    std::uint64_t master_seed = 0;
    std::size_t log_stride = 0;  // 0 selects max(1, T/1000)
    bool emit_bounds = false;
    double delta_prob = 0.05;

    // Throws ConfigError / ParameterError with a message naming the field.
    void validate() const;
    std::size_t n_cells() const noexcept { return sweep_values.empty() ? 1 : sweep_values.size(); }
    // Copy with the swept dimension set to the value of cell `index`.
    ExperimentConfig cell(std::size_t index) const;
    FedConfig fed_config() const;
};

// Seed derivations shared by the harness and its tests.
std::uint64_t mrp_seed_for(std::uint64_t master_seed, std::uint64_t seed);
std::uint64_t ensemble_seed_for(std::uint64_t master_seed, std::size_t cell_index, std::uint64_t seed);
std::uint64_t run_seed_for(std::uint64_t master_seed, std::size_t cell_index, std::uint64_t seed);

struct SeedSummary {
    std::uint64_t seed = 0;
    double max_delta_realized = 0.0;
    double max_delta_spectral = 0.0;
    double lambda_realized = 0.0;
};

struct RunRecord {
    ExperimentConfig config;  // cell config; sweep_values holds just this cell's value
    std::size_t cell_index = 0;
    std::vector<std::size_t> rounds;
    std::vector<std::uint64_t> seeds;
    std::vector<Vector> per_seed_rmse;
    Vector mean_rmse;
    Vector std_rmse;

    int bound_theorem = 0;  // 0 when bounds were not requested
    Vector bound_rmse;      // pointwise max over seeds, in RMSE units
    std::size_t bound_saturated_points = 0;

    std::vector<SeedSummary> seed_summaries;
    std::optional<std::string> failure;

    std::filesystem::path csv_path;
    std::filesystem::path sidecar_path;
};

// √((1/|S|)Σ_s (V̂(s) − V(s))²)
double rmse(const ValueTable& estimate, const ValueTable& truth);

// Pointwise mean and population standard deviation across seeds, seeds
// accumulated in order.
void aggregate_across_seeds(std::span<const Vector> per_seed, Vector& mean, Vector& stddev);

// Mean of the last `fraction` of a series (at least one point).
double tail_mean(std::span<const double> series, double fraction);

std::string format_real(double x);
std::string record_filename(const ExperimentConfig& cell);

struct SweepOptions {
    unsigned threads = 1;
    std::filesystem::path output_dir = "results";
    bool persist = true;
};

// Runs every (cell, seed) pair, aggregates per cell and, when persisting,
// writes results under output_dir/<config.name>/. A failing cell records its
// error and the other cells still run.
std::vector<RunRecord> run_sweep(const ExperimentConfig& config, const SweepOptions& options = {});

// Writes <dir>/<record_filename>.csv plus a .json sidecar; returns the CSV path.
std::filesystem::path persist_csv(RunRecord& record, const std::filesystem::path& output_dir);

std::string csv_header(const RunRecord& record);

}  // namespace fedtd

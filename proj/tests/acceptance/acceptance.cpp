// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// Exit status is the number of failed criteria.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fedtd/fedtd.hpp"

using namespace fedtd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x, int digits = 4) {
    std::ostringstream os;
    os.precision(digits);
    os << x;
    return os.str();
}

unsigned worker_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::size_t checkpoints_checked = 0;

// Every recorded iterate must lie in [0, 1/(1-γ)] (upper end with 1e-12 slack).
bool values_in_range(const ErrorTrace& trace, double gamma) {
    const double ceiling = 1.0 / (1.0 - gamma) + 1e-12;
    for (const auto& v : trace.values) {
        ++checkpoints_checked;
        for (double x : v.values)
            if (!(x >= 0.0 && x <= ceiling)) return false;
    }
    return true;
}

Eigen::VectorXd eigen_value(const Matrix& p, const Vector& r, double gamma) {
    const auto n = static_cast<Eigen::Index>(r.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) -= gamma * p(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    return a.fullPivLu().solve(Eigen::Map<const Eigen::VectorXd>(r.data(), n));
}

double final_rmse(const RunRecord& r) { return tail_mean(r.mean_rmse, 0.5); }

Outcome bellman_oracle() {
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        const std::size_t n = 2 + i % 19;
        const double gamma = std::array{0.5, 0.8, 0.95}[i % 3];
        const Mrp mrp = generate_random_mrp(n, gamma, mix_seed(0xB311, i));
        const auto v = solve_true_value(mrp);
        for (std::size_t s = 0; s < n; ++s) {
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) row += mrp.transition(s, j) * v[j];
            worst = std::max(worst, std::abs(v[s] - gamma * row - mrp.reward[s]));
        }
    }
    const auto hand = solve_true_value(Mrp{Matrix{{0.5, 0.5}, {0.5, 0.5}}, Vector{1, 0}, 0.5});
    const double hand_err = std::max(std::abs(hand[0] - 1.5), std::abs(hand[1] - 0.5));
    return {worst < 1e-10 && hand_err <= 1e-12,
            "max residual " + fmt(worst) + ", 2-state error " + fmt(hand_err)};
}

Outcome value_range_battery() {
    bool ok = true;
    for (double gamma : {0.5, 0.8, 0.95, 0.99}) {
        for (auto regime : {Regime::iid, Regime::markov}) {
            const Mrp mrp = generate_random_mrp(6, gamma, mix_seed(0x4C34, static_cast<std::uint64_t>(gamma * 100)));
            const auto ensemble = build_ensemble(mrp, 5, 0.5, NormKind::frobenius, 11);
            TdConfig tc;
            tc.alpha = 0.5;
            tc.total_steps = 20000;
            tc.log_stride = 1;
            tc.record_values = true;
            ok = ok && values_in_range(run_single_agent(mrp, ensemble.kernels[0], tc, regime, 1), gamma);
            FedConfig fc;
            fc.n_agents = 5;
            fc.local_steps = 5;
            fc.rounds = 4000;
            fc.alpha = 0.5;
            fc.beta = 1.0;
            fc.log_stride = 1;
            fc.record_values = true;
            ok = ok && values_in_range(run_fedtd(mrp, ensemble, fc, regime, 2), gamma);
        }
    }
    return {ok, ""};
}

Outcome bias_oracle() {
    double empirical = 0.0, oracle = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Mrp mrp = generate_random_mrp(5, 0.8, mix_seed(0xB1A5, seed));
        const Matrix p_hat = perturb_kernel(mrp.transition, 1.0, NormKind::frobenius, mix_seed(0xB1A6, seed));
        TdConfig cfg;
        cfg.alpha = 0.001;
        cfg.total_steps = 1'000'000;
        cfg.log_stride = 1000;
        cfg.record_values = true;
        const auto trace = run_single_agent(mrp, p_hat, cfg, Regime::markov, mix_seed(0xB1A7, seed));
        if (!values_in_range(trace, mrp.gamma)) return {false, "value left [0, M]"};
        empirical += tail_mean(trace.rmse, 0.5) / 5.0;

        const Eigen::VectorXd v = eigen_value(mrp.transition, mrp.reward, mrp.gamma);
        const Eigen::VectorXd v_hat = eigen_value(p_hat, mrp.reward, mrp.gamma);
        oracle += std::sqrt((v_hat - v).squaredNorm() / 5.0) / 5.0;
    }
    const double rel = std::abs(empirical - oracle) / oracle;
    return {rel <= 0.2, "time-averaged RMSE " + fmt(empirical) + " vs oracle " + fmt(oracle) + " (rel " + fmt(rel, 3) + ")"};
}

Outcome delta_monotonicity() {
    const auto sets = figure_preset("fig1");
    std::vector<Vector> finals;
    for (const auto& config : sets) {
        Vector f;
        for (const auto& r : run_sweep(config, {worker_threads(), "", false})) {
            if (r.failure) return {false, *r.failure};
            f.push_back(final_rmse(r));
        }
        finals.push_back(f);
    }
    bool ordered = true, agree = true;
    std::string detail;
    for (std::size_t set = 0; set < finals.size(); ++set) {
        detail += (set == 0 ? "iid [" : "; markov [");
        for (std::size_t i = 0; i < finals[set].size(); ++i) {
            detail += (i ? ", " : "") + fmt(finals[set][i]);
            if (i > 0 && !(finals[set][i - 1] < finals[set][i])) ordered = false;
        }
        detail += "]";
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < finals[0].size(); ++i) {
        const double rel = std::abs(finals[0][i] - finals[1][i]) / std::min(finals[0][i], finals[1][i]);
        worst = std::max(worst, rel);
        agree = agree && rel <= 0.25;
    }
    return {ordered && agree, detail + "; max iid/markov gap " + fmt(100 * worst, 3) + "%"};
}

Outcome agent_speedup() {
    const auto config = figure_preset("fig2").at(1);
    Vector finals;
    for (const auto& r : run_sweep(config, {worker_threads(), "", false})) {
        if (r.failure) return {false, *r.failure};
        finals.push_back(final_rmse(r));
    }
    bool ordered = true;
    std::string detail = "N=1,10,20,100: [";
    for (std::size_t i = 0; i < finals.size(); ++i) {
        detail += (i ? ", " : "") + fmt(finals[i]);
        if (i > 0 && !(finals[i] < finals[i - 1])) ordered = false;
    }
    const bool halved = finals.back() < finals.front() / 2.0;
    detail += "]; strictly decreasing: " + std::string(ordered ? "yes" : "no") +
              "; N=100 below half of N=1: " + (halved ? "yes" : "no");
    return {ordered && halved, detail};
}

Outcome communication_efficiency() {
    auto config = figure_preset("fig3").back();
    config.sweep_values = {1, 10};
    const auto records = run_sweep(config, {worker_threads(), "", false});
    for (const auto& r : records)
        if (r.failure) return {false, *r.failure};
    const auto& k1 = records[0];
    const auto& k10 = records[1];
    const double target = 1.1 * tail_mean(k1.mean_rmse, 0.05);
    auto first_below = [&](const RunRecord& r) {
        for (std::size_t i = 0; i < r.rounds.size(); ++i)
            if (r.mean_rmse[i] <= target) return r.rounds[i];
        return std::numeric_limits<std::size_t>::max();
    };
    const auto r1 = first_below(k1), r10 = first_below(k10);
    const bool pass = r10 != std::numeric_limits<std::size_t>::max() && 5 * r10 <= r1;
    return {pass, "target RMSE " + fmt(target) + " reached at round " + std::to_string(r1) + " (K=1) vs " +
                      std::to_string(r10) + " (K=10)"};
}

struct DominationCount {
    int dominated = 0;
    int runs = 0;
};

// A run counts as dominated when ‖e(t)‖₂ ≤ bound(t) at every logged t that is not saturated.
bool dominates(const ErrorTrace& trace, int theorem, const BoundParams& params) {
    const auto bounds = bound_series(theorem, trace.steps, params);
    for (std::size_t k = 0; k < trace.steps.size(); ++k) {
        if (bounds[k].saturated) continue;
        if (!(trace.l2[k] <= bounds[k].value)) return false;
    }
    return true;
}

Outcome bound_domination() {
    const double gamma = 0.8, alpha = 0.05, beta = 0.4, delta = 0.1, delta_prob = 0.05;
    const std::size_t horizon = 10000, n_agents = 10, local_steps = 5;
    const Mrp mrp = generate_random_mrp(5, gamma, 0xD0);
    DominationCount counts[5];
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        for (auto regime : {Regime::iid, Regime::markov}) {
            const auto single = build_ensemble(mrp, 1, delta, NormKind::frobenius, mix_seed(0xD1, seed));
            TdConfig tc;
            tc.alpha = alpha;
            tc.total_steps = horizon;
            tc.log_stride = 10;
            tc.record_values = true;
            const auto st = run_single_agent(mrp, single.kernels[0], tc, regime, mix_seed(0xD2, seed));
            if (!values_in_range(st, gamma)) return {false, "value left [0, M]"};
            const int t_single = theorem_for(false, regime);
            const auto p_single =
                derive_bound_params(t_single, mrp, single, alpha, beta, local_steps, horizon, delta_prob);
            counts[t_single].runs++;
            counts[t_single].dominated += dominates(st, t_single, p_single);

            const auto ensemble = build_ensemble(mrp, n_agents, delta, NormKind::frobenius, mix_seed(0xD3, seed));
            FedConfig fc;
            fc.n_agents = n_agents;
            fc.local_steps = local_steps;
            fc.rounds = horizon;
            fc.alpha = alpha;
            fc.beta = beta;
            fc.log_stride = 10;
            fc.record_values = true;
            const auto ft = run_fedtd(mrp, ensemble, fc, regime, mix_seed(0xD4, seed));
            if (!values_in_range(ft, gamma)) return {false, "value left [0, M]"};
            const int t_fed = theorem_for(true, regime);
            const auto p_fed = derive_bound_params(t_fed, mrp, ensemble, alpha, beta, local_steps, horizon, delta_prob);
            counts[t_fed].runs++;
            counts[t_fed].dominated += dominates(ft, t_fed, p_fed);
        }
    }
    const bool pass = counts[1].dominated >= 19 && counts[3].dominated >= 19 && counts[2].dominated == 20 &&
                      counts[4].dominated == 20;
    std::string detail;
    for (int t = 1; t <= 4; ++t)
        detail += (t > 1 ? ", " : "") + std::string("thm") + std::to_string(t) + " " +
                  std::to_string(counts[t].dominated) + "/" + std::to_string(counts[t].runs);
    return {pass, detail};
}

Outcome reduction_identity() {
    const Mrp mrp = generate_random_mrp(8, 0.8, 0x8ED);
    const auto ensemble = build_ensemble(mrp, 1, 0.3, NormKind::frobenius, 0x8EE);
    bool identical = true;
    for (auto regime : {Regime::iid, Regime::markov}) {
        FedConfig fc;
        fc.n_agents = 1;
        fc.local_steps = 1;
        fc.beta = 1.0;
        fc.alpha = 0.05;
        fc.rounds = 10000;
        fc.log_stride = 1;
        fc.record_values = true;
        TdConfig tc;
        tc.alpha = 0.05;
        tc.total_steps = 10000;
        tc.log_stride = 1;
        tc.record_values = true;
        const auto fed = run_fedtd(mrp, ensemble, fc, regime, 0x8EF);
        const auto single = run_single_agent(mrp, ensemble.kernels[0], tc, regime, 0x8EF);
        identical = identical && fed.values.size() == 10000 && fed.values == single.values && fed.l2 == single.l2;
    }
    return {identical, "10^4 steps, i.i.d. and Markov"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Runs the CLI, returning its exit status and the artifact paths it printed.
int run_cli(const std::string& args, const fs::path& stdout_file) {
    const std::string cmd = std::string("\"") + FEDTD_CLI_PATH + "\" " + args + " > \"" + stdout_file.string() +
                            "\" 2>/dev/null";
    return std::system(cmd.c_str());
}

Outcome cli_determinism() {
    const fs::path root = FEDTD_TEST_TMP;
    fs::remove_all(root);
    const std::vector<std::string> invocations{
        "run --n-states 6 --T 3000 --N 4 --seeds 4 --delta 0.2 --emit-bounds",
        "sweep --name sw --n-states 5 --T 2000 --sweep N --values 1,3,7 --seeds 3 --regime iid",
        "repro fig1 --T 1000 --seeds 3",
        "bounds --theorem 4 --from-instance --n-states 5 --t-max 500 --t-stride 5"};
    std::size_t compared = 0;
    for (std::size_t i = 0; i < invocations.size(); ++i) {
        std::vector<fs::path> dirs;
        for (const char* variant : {"t1", "t8", "t1b"}) {
            const unsigned threads = std::string(variant) == "t8" ? 8 : 1;
            const fs::path dir = root / ("inv" + std::to_string(i)) / variant;
            fs::create_directories(dir);
            const std::string args = "--seed 3 --threads " + std::to_string(threads) + " --out-dir \"" +
                                     (dir / "out").string() + "\" " + invocations[i];
            if (run_cli(args, dir / "stdout.txt") != 0) return {false, "CLI failed: " + invocations[i]};
            dirs.push_back(dir / "out");
        }
        std::vector<fs::path> files;
        for (const auto& e : fs::recursive_directory_iterator(dirs[0]))
            if (e.path().extension() == ".csv") files.push_back(fs::relative(e.path(), dirs[0]));
        if (files.empty()) return {false, "no CSV written by: " + invocations[i]};
        for (const auto& rel : files) {
            const std::string reference = slurp(dirs[0] / rel);
            for (std::size_t d = 1; d < dirs.size(); ++d) {
                if (!fs::exists(dirs[d] / rel) || slurp(dirs[d] / rel) != reference)
                    return {false, "CSV differs: " + rel.string()};
            }
            ++compared;
        }
    }
    return {true, std::to_string(compared) + " CSVs byte-identical across --threads 1, 8 and a repeat"};
}

Outcome projection_correctness() {
    Rng rng(0x51);
    double worst = 0.0;
    const double step = 1e-3;
    const int steps = 1000;
    for (int trial = 0; trial < 1000; ++trial) {
        const Vector y{rng.uniform(-1, 2), rng.uniform(-1, 2), rng.uniform(-1, 2)};
        const auto p = project_row_to_simplex(y);
        double best = std::numeric_limits<double>::infinity();
        Vector best_x(3);
        for (int i = 0; i <= steps; ++i) {
            const double a = i * step;
            const double da = (a - y[0]) * (a - y[0]);
            for (int j = 0; j <= steps - i; ++j) {
                const double b = j * step, c = 1.0 - a - b;
                const double d = da + (b - y[1]) * (b - y[1]) + (c - y[2]) * (c - y[2]);
                if (d < best) {
                    best = d;
                    best_x = {a, b, c};
                }
            }
        }
        double dist = 0.0;
        for (int k = 0; k < 3; ++k) dist += (p[k] - best_x[k]) * (p[k] - best_x[k]);
        worst = std::max(worst, std::sqrt(dist));
    }
    bool idempotent = true;
    for (std::size_t n = 1; n <= 64; ++n) {
        for (int trial = 0; trial < 50; ++trial) {
            Vector y(n);
            for (auto& x : y) x = rng.uniform(-3, 3);
            const auto once = project_row_to_simplex(y);
            idempotent = idempotent && project_row_to_simplex(once) == once;
        }
    }
    return {worst <= 2e-3 && idempotent,
            "max distance to grid optimum " + fmt(worst) + ", idempotent: " + (idempotent ? "yes" : "no")};
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;  // 0 = no runtime budget
    std::function<Outcome()> check;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "Bellman oracle", 1.0, bellman_oracle},
        {3, "bias oracle", 30.0, bias_oracle},
        {4, "delta monotonicity", 300.0, delta_monotonicity},
        {5, "N speedup", 600.0, agent_speedup},
        {6, "K communication efficiency", 300.0, communication_efficiency},
        {7, "bound domination", 120.0, bound_domination},
        {8, "reduction identity", 0.0, reduction_identity},
        {9, "CLI determinism", 0.0, cli_determinism},
        {10, "projection correctness", 0.0, projection_correctness},
    };

    int failed = 0;
    auto report = [&](int id, const char* name, const Outcome& o, double seconds, double budget) {
        const bool in_budget = budget <= 0.0 || seconds < budget;
        const bool pass = o.pass && in_budget;
        failed += !pass;
        std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << o.detail
                  << (o.detail.empty() ? "" : "; ") << fmt(seconds, 3) << " s";
        if (!in_budget) std::cout << " exceeds the " << budget << " s budget";
        std::cout << std::endl;
    };

    bool range_held = true;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const InvariantViolation& e) {
            range_held = false;
            o = {false, std::string("value range violated: ") + e.what()};
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        report(c.id, c.name, o, seconds, c.budget_seconds);
    }

    // Criterion 2 covers every run above (harness runs assert the range at
    // each checkpoint and throw otherwise) plus a battery at extreme γ and α.
    const auto start = std::chrono::steady_clock::now();
    Outcome battery;
    try {
        battery = value_range_battery();
    } catch (const std::exception& e) {
        battery = {false, e.what()};
    }
    battery.pass = battery.pass && range_held;
    battery.detail = std::to_string(checkpoints_checked) + " recorded checkpoints inspected" +
                     (range_held ? "" : ", violation raised during another criterion");
    report(2, "value range", battery, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(),
           0.0);
    return failed;
}

#include "fedtd/mrp.hpp"

#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "fedtd/errors.hpp"
#include "fedtd/random.hpp"

namespace fedtd {

void require_gamma(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw ParameterError("gamma must lie strictly inside (0, 1), got " + std::to_string(gamma));
}

void Mrp::validate() const {
    require_gamma(gamma);
    const std::size_t n = reward.size();
    if (n == 0 || transition.rows() != n || transition.cols() != n)
        throw ParameterError("Mrp: transition must be n×n with n = reward length");
    require_finite(transition.data(), "Mrp transition");
    require_finite(reward, "Mrp reward");
    if (!is_row_stochastic(transition, 1e-12)) throw ParameterError("Mrp: transition is not row-stochastic");
    for (double r : reward)
        if (r < 0.0 || r > 1.0) throw ParameterError("Mrp: rewards must lie in [0, 1]");
}

ErrorVector ErrorVector::between(const ValueTable& estimate, const ValueTable& truth) {
    if (estimate.size() != truth.size()) throw ParameterError("ErrorVector: length mismatch");
    ErrorVector e;
    e.values.resize(estimate.size());
    for (std::size_t s = 0; s < estimate.size(); ++s) e.values[s] = estimate[s] - truth[s];
    return e;
}

Mrp generate_random_mrp(std::size_t n_states, double gamma, std::uint64_t seed) {
    if (n_states < 2) throw ParameterError("generate_random_mrp: n_states must be at least 2");
    require_gamma(gamma);

    Rng rng(seed);
    Mrp mrp;
    mrp.gamma = gamma;
    mrp.transition = Matrix(n_states, n_states);
    for (std::size_t i = 0; i < n_states; ++i) {
        auto row = mrp.transition.row(i);
        double sum = 0.0;
        for (double& p : row) {
            p = rng.uniform_open_closed();
            sum += p;
        }
        for (double& p : row) p /= sum;
    }
    mrp.reward.resize(n_states);
    for (double& r : mrp.reward) r = rng.uniform01();
    return mrp;
}

ValueTable solve_value_for_kernel(const Matrix& kernel, std::span<const double> reward, double gamma) {
    require_gamma(gamma);
    const std::size_t n = reward.size();
    if (kernel.rows() != n || kernel.cols() != n) throw ParameterError("solve_value_for_kernel: dimension mismatch");
    Matrix system(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) system(i, j) = (i == j ? 1.0 : 0.0) - gamma * kernel(i, j);
    try {
        return ValueTable(solve_linear(std::move(system), Vector(reward.begin(), reward.end())));
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("internal numerical error in Bellman solve: ") + e.what());
    }
}

ValueTable solve_true_value(const Mrp& mrp) {
    mrp.validate();
    return solve_value_for_kernel(mrp.transition, mrp.reward, mrp.gamma);
}

bool is_irreducible_aperiodic(const Matrix& transition) {
    const std::size_t n = transition.rows();
    if (n == 0 || !transition.square()) return false;

    // BFS levels from state 0 along positive entries, then along reversed edges.
    auto bfs = [&](bool reversed) {
        std::vector<long> level(n, -1);
        std::queue<std::size_t> frontier;
        level[0] = 0;
        frontier.push(0);
        while (!frontier.empty()) {
            const std::size_t u = frontier.front();
            frontier.pop();
            for (std::size_t v = 0; v < n; ++v) {
                const double p = reversed ? transition(v, u) : transition(u, v);
                if (p > 0.0 && level[v] < 0) {
                    level[v] = level[u] + 1;
                    frontier.push(v);
                }
            }
        }
        return level;
    };

    const auto forward = bfs(false);
    const auto backward = bfs(true);
    for (std::size_t s = 0; s < n; ++s)
        if (forward[s] < 0 || backward[s] < 0) return false;

    // Period = gcd over edges u→v of (level[u] + 1 - level[v]).
    long period = 0;
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v)
            if (transition(u, v) > 0.0) period = std::gcd(period, std::abs(forward[u] + 1 - forward[v]));
    return period == 1;
}

Vector stationary_distribution(const Matrix& transition, double tol) {
    require_finite(transition.data(), "stationary_distribution");
    if (!(tol > 0.0 && tol < 1.0)) throw ParameterError("stationary_distribution: tol must lie in (0, 1)");
    if (!is_row_stochastic(transition, 1e-9)) throw ParameterError("stationary_distribution: matrix is not row-stochastic");
    if (!is_irreducible_aperiodic(transition))
        throw ChainStructureError("stationary_distribution: chain is reducible or periodic");

    const std::size_t n = transition.rows();
    const auto cap = static_cast<long>(std::ceil(100.0 * static_cast<double>(n) * std::log(1.0 / tol)));
    Vector pi(n, 1.0 / static_cast<double>(n));
    for (long it = 0; it < cap; ++it) {
        Vector next = left_multiply(pi, transition);
        const double total = std::accumulate(next.begin(), next.end(), 0.0);
        double diff = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            next[s] /= total;
            diff += std::abs(next[s] - pi[s]);
        }
        pi = std::move(next);
        if (diff < tol) return pi;
    }
    throw ChainStructureError("stationary_distribution: power iteration did not converge within " +
                              std::to_string(cap) + " iterations");
}

}  // namespace fedtd

#include "fedtd/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedtd/errors.hpp"
#include "fedtd/mrp.hpp"

namespace fedtd {

std::string_view to_string(Regime regime) { return regime == Regime::iid ? "iid" : "markov"; }

std::string_view to_string(IidOption option) {
    return option == IidOption::stationary ? "stationary" : "uniform";
}

Regime parse_regime(std::string_view name) {
    if (name == "iid") return Regime::iid;
    if (name == "markov") return Regime::markov;
    throw ParameterError("unknown sampling regime '" + std::string(name) + "'");
}

IidOption parse_iid_option(std::string_view name) {
    if (name == "stationary") return IidOption::stationary;
    if (name == "uniform") return IidOption::uniform;
    throw ParameterError("unknown iid option '" + std::string(name) + "'");
}

namespace {

std::size_t inverse_cdf(std::span<const double> cdf, double u, std::size_t fallback) noexcept {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return it == cdf.end() ? fallback : static_cast<std::size_t>(it - cdf.begin());
}

std::size_t last_positive(std::span<const double> probs) {
    for (std::size_t j = probs.size(); j-- > 0;)
        if (probs[j] > 0.0) return j;
    throw ParameterError("distribution has no positive entry");
}

Vector cumulative(std::span<const double> probs) {
    Vector cdf(probs.size());
    std::partial_sum(probs.begin(), probs.end(), cdf.begin());
    return cdf;
}

}  // namespace

KernelSampler::KernelSampler(const Matrix& kernel) : n_(kernel.rows()) {
    if (!is_row_stochastic(kernel, 1e-9)) throw ParameterError("KernelSampler: kernel is not row-stochastic");
    cdf_.resize(n_ * n_);
    last_positive_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        auto row = kernel.row(i);
        std::partial_sum(row.begin(), row.end(), cdf_.begin() + static_cast<std::ptrdiff_t>(i * n_));
        last_positive_[i] = last_positive(row);
    }
}

std::size_t KernelSampler::draw(std::size_t state, double u) const noexcept {
    return inverse_cdf({cdf_.data() + state * n_, n_}, u, last_positive_[state]);
}

Vector initial_distribution(IidOption option, const Matrix& kernel) {
    if (option == IidOption::stationary) return stationary_distribution(kernel);
    return Vector(kernel.rows(), 1.0 / static_cast<double>(kernel.rows()));
}

SamplerState::SamplerState(Regime regime, const Matrix& kernel, std::span<const double> reward,
                           Vector initial_dist, std::uint64_t seed)
    : regime_(regime),
      kernel_(kernel),
      reward_(reward.begin(), reward.end()),
      initial_dist_(std::move(initial_dist)),
      rng_(seed) {
    const std::size_t n = kernel.rows();
    if (reward_.size() != n || initial_dist_.size() != n)
        throw ParameterError("SamplerState: kernel, reward and initial distribution sizes differ");
    for (double p : initial_dist_)
        if (!(p >= 0.0)) throw ParameterError("SamplerState: initial distribution has negative entries");
    if (std::abs(std::accumulate(initial_dist_.begin(), initial_dist_.end(), 0.0) - 1.0) > 1e-12)
        throw ParameterError("SamplerState: initial distribution must sum to 1");
    initial_cdf_ = cumulative(initial_dist_);
    if (regime_ == Regime::markov) current_state_ = draw_initial();
}

SamplerState SamplerState::create(Regime regime, IidOption option, const Matrix& kernel,
                                  std::span<const double> reward, std::uint64_t seed) {
    return SamplerState(regime, kernel, reward, initial_distribution(option, kernel), seed);
}

std::size_t SamplerState::draw_initial() {
    return inverse_cdf(initial_cdf_, rng_.uniform01(), last_positive(initial_dist_));
}

Transition SamplerState::next_transition() {
    const std::size_t s = regime_ == Regime::iid ? draw_initial() : current_state_;
    const std::size_t next = kernel_.draw(s, rng_.uniform01());
    if (regime_ == Regime::markov) current_state_ = next;
    return {s, reward_[s], next};
}

std::size_t estimate_mixing_time(const Matrix& kernel, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("estimate_mixing_time: epsilon must lie in (0, 1)");
    const Vector pi = stationary_distribution(kernel, 1e-14);
    const std::size_t n = kernel.rows();

    constexpr std::size_t kCap = 1'000'000;
    Matrix power = kernel;
    for (std::size_t t = 1; t <= kCap; ++t) {
        double worst = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            auto row = power.row(s);
            double tv = 0.0;
            for (std::size_t j = 0; j < n; ++j) tv += std::abs(row[j] - pi[j]);
            worst = std::max(worst, 0.5 * tv);
        }
        if (worst <= epsilon) return t;
        Matrix next = multiply(power, kernel);
        if (next == power)
            throw ChainStructureError("estimate_mixing_time: powers stopped changing above epsilon");
        power = std::move(next);
    }
    throw ChainStructureError("estimate_mixing_time: exceeded 10^6 steps");
}

}  // namespace fedtd

#include <doctest.h>

#include <cmath>

#include "fedtd/bounds.hpp"
#include "fedtd/errors.hpp"
#include "fedtd/mrp.hpp"
#include "fedtd/random.hpp"

using namespace fedtd;

namespace {

BoundParams base_params() {
    BoundParams p;
    p.alpha = 0.01;
    p.beta = 0.4;
    p.gamma = 0.8;
    p.local_steps = 5;
    p.n_agents = 10;
    p.horizon = 1000;
    p.delta_mismatch = 0.1;
    p.lambda_mismatch = 0.1;
    p.n_states = 10;
    p.e0_norm = 0.0;
    p.delta_prob = 0.05;
    p.tau = 1.0;
    p.c_p = 1.0;
    p.c_mu = 1.0;
    return p;
}

}  // namespace

TEST_CASE("Theorem 1 mismatch term by hand") {
    auto p = base_params();
    // With e0 = 0 and the sampling term removed by comparison, what is left is
    // 0.8·0.1·√10/0.04.
    const double t = 1.0;
    const double sampling = 0.01 * 1.0 / 0.2 * std::sqrt(32.0 * (std::log(1.0 / 0.05) + 0.25));
    const double value = bound_single_iid(t, p).value;
    CHECK(value - sampling == doctest::Approx(6.3246).epsilon(1e-5));
    CHECK(value - sampling == doctest::Approx(0.8 * 0.1 * std::sqrt(10.0) / 0.04).epsilon(1e-13));
}

TEST_CASE("Theorem 2 with a rank-1 chain") {
    auto p = base_params();
    p.tau = static_cast<double>(mixing_time_for(Matrix{{0.3, 0.7}, {0.3, 0.7}}, p.alpha));
    CHECK(p.tau == 1.0);
    p.delta_mismatch = 0.0;
    const double third = p.alpha / 0.2 * (2.0 / 0.2 + 1.0);
    CHECK(bound_single_markov(50.0, p).value == doctest::Approx(third).epsilon(1e-14));
}

TEST_CASE("federated contraction factor") {
    const auto terms = fed_bound_terms(base_params());
    CHECK(terms.rho == doctest::Approx(0.6 + 0.4 * std::pow(0.998, 5)).epsilon(1e-15));
    CHECK(terms.rho == doctest::Approx(0.99601597).epsilon(1e-8));
    CHECK(terms.c == doctest::Approx(std::exp(10.0)));

    Rng rng(8);
    for (int i = 0; i < 1000; ++i) {
        BoundParams p = base_params();
        p.alpha = rng.uniform(1e-6, 1.0 - 1e-6);
        p.beta = rng.uniform(1e-6, 1.0 - 1e-6);
        p.gamma = rng.uniform(1e-6, 1.0 - 1e-6);
        p.local_steps = 1 + rng.next_u64() % 20;
        const double rho = fed_bound_terms(p).rho;
        CHECK(rho > 0.0);
        CHECK(rho < 1.0);
    }
}

TEST_CASE("Theorem 3 and 4 assemble their terms") {
    auto p = base_params();
    p.e0_norm = 2.0;
    const auto terms = fed_bound_terms(p);
    const double a = std::sqrt(2.0 * (std::log(3.0 * 1000 / 0.05) + 0.25));
    const double t = 40.0;
    const double expected3 = std::pow(terms.rho, t) * 2.0 + terms.b1 / std::sqrt(10.0) + 1e-4 * terms.b2 +
                             4.0 / std::sqrt(10.0) * 0.4 * 0.01 * std::sqrt(t) * std::sqrt(5.0) * a * a * a / 0.2;
    CHECK(bound_fed_iid(t, p).value == doctest::Approx(expected3).epsilon(1e-13));
    const double expected4 = std::pow(terms.rho, t) * 2.0 + terms.b1 / std::sqrt(10.0) + 1e-4 * terms.b2 +
                             0.4 / 0.2 * (2.0 * 1.0 / 0.2 + t * 0.4);
    CHECK(bound_fed_markov(t, p).value == doctest::Approx(expected4).epsilon(1e-13));
}

TEST_CASE("bound monotonicity") {
    for (int theorem = 1; theorem <= 4; ++theorem) {
        auto p = base_params();
        p.e0_norm = 5.0;
        const double at = evaluate_bound(theorem, 10, p).value;
        auto q = p;
        q.delta_mismatch *= 2;
        CHECK(evaluate_bound(theorem, 10, q).value > at);
        q = p;
        q.e0_norm *= 2;
        CHECK(evaluate_bound(theorem, 10, q).value > at);
        if (theorem >= 3) {
            q = p;
            q.lambda_mismatch *= 2;
            CHECK(evaluate_bound(theorem, 10, q).value > at);
            CHECK(fed_bound_terms(q).b1 > fed_bound_terms(p).b1);
            q = p;
            q.n_agents = 40;
            CHECK(fed_bound_terms(q).b1 / std::sqrt(40.0) < fed_bound_terms(p).b1 / std::sqrt(10.0));
        }
        CHECK(at >= 0.0);
    }
    // The contraction part alone decays with t.
    auto p = base_params();
    p.e0_norm = 5.0;
    p.delta_mismatch = 0.0;
    p.tau = 0.0;
    CHECK(bound_single_markov(100, p).value - 0.05 < bound_single_markov(10, p).value - 0.05);
}

TEST_CASE("lower residual with the tuned step size") {
    for (double gamma = 0.05; gamma < 1.0; gamma += 0.05) {
        auto p = base_params();
        p.gamma = gamma;
        p.local_steps = 200;
        p.c_p = 0.01;
        p.c_mu = 0.01;
        const double c = std::exp(static_cast<double>(p.local_steps) * (p.c_p + p.c_mu));
        p.alpha = std::sqrt(1.0 / (gamma * c));
        if (!(p.alpha < 1.0)) continue;
        const auto terms = fed_bound_terms(p);
        const double single = gamma * p.delta_mismatch * std::sqrt(10.0) / ((1 - gamma) * (1 - gamma));
        CHECK(p.alpha * p.alpha * terms.b2 <= single);
    }
}

TEST_CASE("saturation and validation") {
    auto p = base_params();
    p.c_p = 1e3;
    const auto v = bound_fed_iid(10, p);
    CHECK(v.saturated);
    CHECK(v.value == kBoundCap);
    CHECK_FALSE(bound_fed_iid(10, base_params()).saturated);

    CHECK_THROWS_AS(bound_single_iid(0.0, base_params()), ParameterError);
    CHECK_THROWS_AS(evaluate_bound(5, 1.0, base_params()), ParameterError);
    auto bad = base_params();
    bad.gamma = 1.0;
    CHECK_THROWS_AS(bound_single_markov(1.0, bad), ParameterError);
}

TEST_CASE("power norm estimates") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::size_t n = 2 + seed % 15;
        const Mrp mrp = generate_random_mrp(n, 0.8, seed);
        const double c = estimate_power_norm_bounds(mrp.transition, 5);
        CHECK(c >= 1.0);
        CHECK(c <= std::sqrt(static_cast<double>(n)) + 1e-9);
    }
    // Rank-1 kernel with uniform rows: every power has norm √(n·‖q‖²) = 1.
    const std::size_t n = 4;
    Matrix uniform(n, n, 0.25);
    CHECK(spectral_norm(matrix_power(uniform, 3)) == doctest::Approx(std::sqrt(n * 4 * 0.0625)).epsilon(1e-9));
    const Matrix skew{{0.7, 0.3}, {0.7, 0.3}};
    CHECK(spectral_norm(skew) == doctest::Approx(std::sqrt(2 * (0.49 + 0.09))).epsilon(1e-9));
    CHECK(estimate_power_norm_bounds(skew, 3) == doctest::Approx(std::sqrt(2 * 0.58)).epsilon(1e-9));
}

TEST_CASE("derived parameters from an instance") {
    const Mrp mrp = generate_random_mrp(5, 0.8, 1);
    const auto ensemble = build_ensemble(mrp, 4, 0.2, NormKind::frobenius, 3);
    const auto p = derive_bound_params(4, mrp, ensemble, 0.05, 0.4, 5, 1000, 0.05);
    CHECK(p.e0_norm == doctest::Approx(norm2(solve_true_value(mrp).values)));
    CHECK(p.lambda_mismatch == ensemble.lambda_realized);
    CHECK(p.delta_mismatch <= 0.2 + 1e-9);
    CHECK(p.tau >= 1.0);
    CHECK(p.c_p >= 1.0);
    CHECK(p.n_agents == 4);
    CHECK(theorem_for(true, Regime::iid) == 3);
    CHECK(theorem_for(false, Regime::markov) == 2);
}

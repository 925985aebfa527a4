#include "fedtd/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "fedtd/errors.hpp"
#include "fedtd/random.hpp"

namespace fedtd {

std::string_view to_string(NormKind kind) {
    return kind == NormKind::spectral ? "spectral" : "frobenius";
}

NormKind parse_norm_kind(std::string_view name) {
    if (name == "spectral") return NormKind::spectral;
    if (name == "frobenius") return NormKind::frobenius;
    throw ParameterError("unknown norm kind '" + std::string(name) + "'");
}

double matrix_norm(const Matrix& m, NormKind kind) {
    return kind == NormKind::spectral ? spectral_norm(m) : frobenius_norm(m);
}

Vector project_row_to_simplex(std::span<const double> row) {
    require_finite(row, "project_row_to_simplex");
    if (row.empty()) throw ParameterError("project_row_to_simplex: empty row");

    const bool nonnegative = std::all_of(row.begin(), row.end(), [](double x) { return x >= 0.0; });
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    if (nonnegative && std::abs(total - 1.0) <= 1e-12) return Vector(row.begin(), row.end());

    Vector sorted(row.begin(), row.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        cumulative += sorted[k];
        const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
        if (sorted[k] - candidate > 0.0) theta = candidate;
    }

    Vector out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) out[j] = std::max(row[j] - theta, 0.0);
    return out;
}

namespace {

Matrix project_rows(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const Vector projected = project_row_to_simplex(m.row(i));
        std::copy(projected.begin(), projected.end(), out.row(i).begin());
    }
    return out;
}

}  // namespace

Matrix perturb_kernel(const Matrix& base, double delta, NormKind kind, std::uint64_t seed) {
    require_finite(base.data(), "perturb_kernel");
    if (!is_row_stochastic(base, 1e-9)) throw ParameterError("perturb_kernel: base kernel is not row-stochastic");
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw ParameterError("perturb_kernel: delta must be a nonnegative real");
    if (delta == 0.0) return base;

    Rng rng(seed);
    Matrix noise(base.rows(), base.cols());
    for (double& e : noise.data()) e = rng.uniform(-1.0, 1.0);
    const double noise_norm = matrix_norm(noise, kind);
    if (noise_norm == 0.0) return base;

    constexpr int kMaxHalvings = 60;
    constexpr double kSlack = 1e-12;
    double scale = delta / noise_norm;
    for (int attempt = 0; attempt <= kMaxHalvings; ++attempt, scale *= 0.5) {
        Matrix candidate = project_rows(base + scale * noise);
        if (matrix_norm(candidate - base, kind) <= delta + kSlack) return candidate;
    }
    return base;
}

Matrix PerturbedEnsemble::average_kernel() const {
    if (kernels.empty()) throw ParameterError("average_kernel: empty ensemble");
    Matrix avg(kernels.front().rows(), kernels.front().cols());
    for (const auto& k : kernels) avg = avg + k;
    return (1.0 / static_cast<double>(kernels.size())) * avg;
}

PerturbedEnsemble build_ensemble(const Mrp& base, std::size_t n_agents, double delta, NormKind kind,
                                 std::uint64_t seed) {
    if (n_agents < 1) throw ParameterError("build_ensemble: n_agents must be at least 1");
    base.validate();

    PerturbedEnsemble ensemble;
    ensemble.delta_target = delta;
    ensemble.norm_kind = kind;
    ensemble.kernels.reserve(n_agents);
    for (std::size_t i = 0; i < n_agents; ++i) {
        ensemble.kernels.push_back(perturb_kernel(base.transition, delta, kind, mix_seed(seed, i)));
        const Matrix diff = ensemble.kernels.back() - base.transition;
        ensemble.delta_realized.push_back(matrix_norm(diff, kind));
        ensemble.delta_spectral.push_back(kind == NormKind::spectral ? ensemble.delta_realized.back()
                                                                     : spectral_norm(diff));
    }
    const Matrix avg = n_agents == 1 ? ensemble.kernels.front() : ensemble.average_kernel();
    ensemble.lambda_realized = std::sqrt(static_cast<double>(n_agents)) * spectral_norm(avg - base.transition);
    return ensemble;
}

}  // namespace fedtd

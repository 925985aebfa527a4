#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fedtd/linalg.hpp"
#include "fedtd/mrp.hpp"

namespace fedtd {

enum class NormKind { spectral, frobenius };

std::string_view to_string(NormKind kind);
NormKind parse_norm_kind(std::string_view name);

double matrix_norm(const Matrix& m, NormKind kind);

// Euclidean projection onto the probability simplex (sort and threshold).
// Rows that are already on the simplex (nonnegative, sum within 1e-12 of 1)
// are returned untouched, so the projection is exactly idempotent.
Vector project_row_to_simplex(std::span<const double> row);

// Π(base + E) with E i.i.d. uniform[-1,1] scaled to norm `delta`, Π the
// row-wise simplex projection. The post-projection deviation is checked and
// the noise halved until ‖P̂ - base‖ ≤ delta (at most 60 halvings).
Matrix perturb_kernel(const Matrix& base, double delta, NormKind kind, std::uint64_t seed);

struct PerturbedEnsemble {
    std::vector<Matrix> kernels;
    double delta_target = 0.0;
    // ‖P̂_i - P‖ under norm_kind.
    Vector delta_realized;
    // ‖P̂_i - P‖₂, always spectral; this is what the convergence bounds consume.
    Vector delta_spectral;
    // √N·‖(1/N)ΣP̂_i - P‖₂
    double lambda_realized = 0.0;
    NormKind norm_kind = NormKind::frobenius;

    std::size_t size() const noexcept { return kernels.size(); }
    Matrix average_kernel() const;
};

// Agent i uses seed mix_seed(seed, i).
PerturbedEnsemble build_ensemble(const Mrp& base, std::size_t n_agents, double delta, NormKind kind,
                                 std::uint64_t seed);

}  // namespace fedtd

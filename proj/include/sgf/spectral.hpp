#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sgf/graph.hpp"
#include "sgf/rng.hpp"
#include "sgf/tensor.hpp"

namespace sgf {

enum class FilterBasis { Laplacian, AugmentedAdjacency };

const char* to_string(FilterBasis b);

/// f(P) = Σ coeffs[i] · P^i, with P the basis operator.
struct MonomialFilter {
    std::vector<double> coeffs;
    FilterBasis basis = FilterBasis::Laplacian;

    std::size_t degree() const noexcept { return coeffs.empty() ? 0 : coeffs.size() - 1; }
};

/// f sampled on a λ grid. For the augmented-adjacency basis λ is an
/// eigenvalue of the augmented normalized Laplacian I - Ã.
struct FilterResponse {
    std::vector<double> lambdas;
    std::vector<double> values;
    std::string run_id;
    std::string dataset;
    double accuracy = 0.0;
};

struct FrequencyStats {
    double mean = 0.0;
    double std = 0.0;  // population
    std::vector<double> per_component;
};

/// xᵀ𝓛x / xᵀx. Requires a NormalizedLaplacian operator and x ≠ 0.
double rayleigh_quotient(const SparseOperator& laplacian, std::span<const double> x);

/// Per class c the signed indicator (+1 on class c, -1 elsewhere); mean and
/// population std of their Rayleigh quotients.
FrequencyStats label_frequency(const Graph& g, std::span<const int> labels, int num_classes);

/// Rayleigh quotient of every feature column that has a nonzero entry.
FrequencyStats feature_frequency(const Graph& g, const DenseMatrix& features);

/// Closed form of the stacked recurrence H_l = α_l P H_{l-1} + β_l H_0:
///   θ_0 = β_K,  θ_{K-i+1} = (Π_{j=i..K} α_j) β_{i-1}  (i = 1..K, β_0 = 1).
MonomialFilter stacked_to_monomial(std::span<const double> alphas, std::span<const double> betas,
                                   FilterBasis basis);

struct StackedCoefficients {
    std::vector<double> alphas;
    std::vector<double> betas;
};

/// Right inverse of stacked_to_monomial: α_1 = θ_K and α_j = 1 otherwise,
/// β_m = θ_{K-m}. All-zero θ is rejected.
StackedCoefficients monomial_to_stacked(std::span<const double> theta);

/// Expands Σ θ_k T_k((2/λ_max)λ - 1) into powers of λ (Laplacian basis).
MonomialFilter cheby_to_monomial(std::span<const double> theta, double lambda_max);

/// f(λ) for the Laplacian basis; Σ θ_i (1-λ)^i for the Ã basis.
double evaluate_filter(const MonomialFilter& filter, double lambda);

/// Uniform grid of `grid_points` values over [0, 2].
FilterResponse filter_response(const MonomialFilter& filter, std::size_t grid_points);

/// 4 N⁻¹ p⁻² (yᵀ𝓛_n y - (1-p) yᵀ diag(𝓛_n) y), where 𝓛_n is the normalized
/// Laplacian of the subgraph induced by the sampled vertices and y has
/// entries ±1/2.
double estimate_rayleigh(const SparseOperator& induced_laplacian, std::span<const double> y,
                         double p, std::size_t total_vertices);

struct SampleEstimate {
    double estimate = 0.0;  // mean over one-vs-rest classes of estimate_rayleigh
    double naive = 0.0;     // mean of r(𝓛_n, y_n) on the same sample
    std::size_t sample_size = 0;
};

/// Each vertex kept independently with probability p; redrawn while empty.
std::vector<bool> bernoulli_sample(std::size_t n, double p, Rng& rng);

/// Applies estimate_rayleigh to the vertices selected by `sample`.
SampleEstimate estimate_label_frequency(const Graph& g, std::span<const int> labels,
                                        int num_classes, const std::vector<bool>& sample,
                                        double p);

struct GapBound {
    double gap = 0.0;     // |r(ŷ) - r(y)|
    double sqnorm = 0.0;  // ‖ŷ - y‖²
    bool holds = false;   // sqnorm >= gap/4 - 1e-9
    bool holds_norm = false;  // ‖ŷ - y‖ >= gap/4 - 1e-9
};

/// Compares the frequency gap of two unit vectors with their distance.
GapBound frequency_gap_bound_check(std::span<const double> y_hat, std::span<const double> y,
                                   const SparseOperator& laplacian);

}  // namespace sgf

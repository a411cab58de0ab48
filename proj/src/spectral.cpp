#include "sgf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sgf/error.hpp"

namespace sgf {

const char* to_string(FilterBasis b) {
    return b == FilterBasis::Laplacian ? "laplacian" : "augmented_adjacency";
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

FrequencyStats summarize(std::vector<double> values) {
    FrequencyStats st;
    st.per_component = std::move(values);
    if (st.per_component.empty()) return st;
    const auto k = static_cast<double>(st.per_component.size());
    st.mean = std::accumulate(st.per_component.begin(), st.per_component.end(), 0.0) / k;
    double var = 0.0;
    for (double v : st.per_component) var += (v - st.mean) * (v - st.mean);
    st.std = std::sqrt(var / k);
    return st;
}

void require_laplacian(const SparseOperator& op, const char* who) {
    if (op.kind != OperatorKind::NormalizedLaplacian)
        throw InvalidInput(std::string(who) + ": operator must be the normalized Laplacian");
}

}  // namespace

double rayleigh_quotient(const SparseOperator& laplacian, std::span<const double> x) {
    require_laplacian(laplacian, "rayleigh_quotient");
    if (x.size() != laplacian.n) throw InvalidInput("rayleigh_quotient: dimension mismatch");
    const double xx = dot(x, x);
    if (xx == 0.0) throw InvalidInput("rayleigh_quotient: zero vector");
    const std::vector<double> lx = spmv(laplacian, x);
    return dot(x, lx) / xx;
}

FrequencyStats label_frequency(const Graph& g, std::span<const int> labels, int num_classes) {
    if (num_classes < 2) throw InvalidInput("label_frequency: needs at least 2 classes");
    if (labels.size() != g.num_vertices()) throw InvalidInput("label_frequency: label count mismatch");
    const SparseOperator lap = normalized_laplacian(g);
    std::vector<double> x(labels.size());
    std::vector<double> per_class;
    for (int c = 0; c < num_classes; ++c) {
        for (std::size_t u = 0; u < labels.size(); ++u) x[u] = labels[u] == c ? 1.0 : -1.0;
        per_class.push_back(rayleigh_quotient(lap, x));
    }
    return summarize(std::move(per_class));
}

FrequencyStats feature_frequency(const Graph& g, const DenseMatrix& features) {
    if (features.rows() != g.num_vertices())
        throw InvalidInput("feature_frequency: feature rows mismatch");
    const SparseOperator lap = normalized_laplacian(g);
    std::vector<double> col(features.rows());
    std::vector<double> per_col;
    for (std::size_t j = 0; j < features.cols(); ++j) {
        bool nonzero = false;
        for (std::size_t u = 0; u < features.rows(); ++u) {
            col[u] = features(u, j);
            nonzero = nonzero || col[u] != 0.0;
        }
        if (nonzero) per_col.push_back(rayleigh_quotient(lap, col));
    }
    return summarize(std::move(per_col));
}

MonomialFilter stacked_to_monomial(std::span<const double> alphas, std::span<const double> betas,
                                   FilterBasis basis) {
    const std::size_t k = alphas.size();
    if (k < 1 || betas.size() != k)
        throw InvalidInput("stacked_to_monomial: need K >= 1 alphas and K betas");
    MonomialFilter f{std::vector<double>(k + 1, 0.0), basis};
    f.coeffs[0] = betas[k - 1];
    // suffix product Π_{j=i..K} α_j accumulated from i = K downwards
    double prod = 1.0;
    for (std::size_t i = k; i >= 1; --i) {
        prod *= alphas[i - 1];
        const double beta_prev = i == 1 ? 1.0 : betas[i - 2];
        f.coeffs[k - i + 1] = prod * beta_prev;
    }
    return f;
}

StackedCoefficients monomial_to_stacked(std::span<const double> theta) {
    if (theta.size() < 2) throw InvalidInput("monomial_to_stacked: need degree K >= 1");
    if (std::all_of(theta.begin(), theta.end(), [](double t) { return t == 0.0; }))
        throw InvalidInput("monomial_to_stacked: all-zero coefficients");
    const std::size_t k = theta.size() - 1;
    StackedCoefficients s{std::vector<double>(k, 1.0), std::vector<double>(k, 0.0)};
    s.alphas[0] = theta[k];
    for (std::size_t m = 1; m <= k; ++m) s.betas[m - 1] = theta[k - m];
    return s;
}

MonomialFilter cheby_to_monomial(std::span<const double> theta, double lambda_max) {
    if (!(lambda_max > 0.0)) throw InvalidInput("cheby_to_monomial: lambda_max must be > 0");
    if (theta.empty()) throw InvalidInput("cheby_to_monomial: empty coefficients");
    const std::size_t k = theta.size() - 1;
    const double a = 2.0 / lambda_max;
    MonomialFilter f{std::vector<double>(k + 1, 0.0), FilterBasis::Laplacian};

    std::vector<double> t_prev{1.0};  // T_0
    std::vector<double> t_cur{-1.0, a};  // T_1 = aλ - 1
    f.coeffs[0] += theta[0];
    if (k >= 1) {
        f.coeffs[0] += theta[1] * t_cur[0];
        f.coeffs[1] += theta[1] * t_cur[1];
    }
    for (std::size_t order = 2; order <= k; ++order) {
        // T_order = 2(aλ - 1) T_{order-1} - T_{order-2}
        std::vector<double> t_next(order + 1, 0.0);
        for (std::size_t i = 0; i < t_cur.size(); ++i) {
            t_next[i] -= 2.0 * t_cur[i];
            t_next[i + 1] += 2.0 * a * t_cur[i];
        }
        for (std::size_t i = 0; i < t_prev.size(); ++i) t_next[i] -= t_prev[i];
        for (std::size_t i = 0; i <= order; ++i) f.coeffs[i] += theta[order] * t_next[i];
        t_prev = std::move(t_cur);
        t_cur = std::move(t_next);
    }
    return f;
}

double evaluate_filter(const MonomialFilter& filter, double lambda) {
    const double x = filter.basis == FilterBasis::Laplacian ? lambda : 1.0 - lambda;
    double acc = 0.0;  // Horner
    for (auto it = filter.coeffs.rbegin(); it != filter.coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

FilterResponse filter_response(const MonomialFilter& filter, std::size_t grid_points) {
    if (grid_points < 2) throw InvalidInput("filter_response: need at least 2 grid points");
    FilterResponse r;
    r.lambdas.resize(grid_points);
    r.values.resize(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i) {
        r.lambdas[i] = 2.0 * static_cast<double>(i) / static_cast<double>(grid_points - 1);
        r.values[i] = evaluate_filter(filter, r.lambdas[i]);
    }
    return r;
}

double estimate_rayleigh(const SparseOperator& induced_laplacian, std::span<const double> y,
                         double p, std::size_t total_vertices) {
    require_laplacian(induced_laplacian, "estimate_rayleigh");
    if (!(p > 0.0 && p <= 1.0)) throw InvalidInput("estimate_rayleigh: p must be in (0, 1]");
    if (total_vertices == 0) throw InvalidInput("estimate_rayleigh: N must be positive");
    if (y.size() != induced_laplacian.n) throw InvalidInput("estimate_rayleigh: dimension mismatch");
    const std::vector<double> ly = spmv(induced_laplacian, y);
    const double quad = dot(y, ly);
    double diag_term = 0.0;
    for (Vertex u = 0; u < induced_laplacian.n; ++u)
        diag_term += y[u] * y[u] * induced_laplacian.diagonal(u);
    return 4.0 / (static_cast<double>(total_vertices) * p * p) * (quad - (1.0 - p) * diag_term);
}

std::vector<bool> bernoulli_sample(std::size_t n, double p, Rng& rng) {
    if (n == 0) throw InvalidInput("bernoulli_sample: n must be positive");
    if (!(p > 0.0 && p <= 1.0)) throw InvalidInput("bernoulli_sample: p must be in (0, 1]");
    std::bernoulli_distribution keep(p);
    std::vector<bool> mask(n);
    bool any = false;
    while (!any) {
        for (std::size_t u = 0; u < n; ++u) {
            mask[u] = keep(rng);
            any = any || mask[u];
        }
    }
    return mask;
}

SampleEstimate estimate_label_frequency(const Graph& g, std::span<const int> labels,
                                        int num_classes, const std::vector<bool>& sample,
                                        double p) {
    if (num_classes < 2) throw InvalidInput("estimate_label_frequency: needs at least 2 classes");
    std::vector<int> sampled_labels;
    for (std::size_t u = 0; u < labels.size(); ++u)
        if (sample[u]) sampled_labels.push_back(labels[u]);
    if (sampled_labels.empty()) throw InvalidInput("estimate_label_frequency: empty sample");

    const SparseOperator lap = normalized_laplacian(induced_subgraph(g, sample));
    SampleEstimate est;
    est.sample_size = sampled_labels.size();
    // binary labels give y and -y, identical quotients; one class suffices
    const int classes_used = num_classes == 2 ? 1 : num_classes;
    std::vector<double> y(sampled_labels.size());
    for (int c = 0; c < classes_used; ++c) {
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = sampled_labels[i] == c ? 0.5 : -0.5;
        est.estimate += estimate_rayleigh(lap, y, p, labels.size());
        est.naive += rayleigh_quotient(lap, y);
    }
    est.estimate /= classes_used;
    est.naive /= classes_used;
    return est;
}

GapBound frequency_gap_bound_check(std::span<const double> y_hat, std::span<const double> y,
                                   const SparseOperator& laplacian) {
    require_laplacian(laplacian, "frequency_gap_bound_check");
    if (y_hat.size() != y.size() || y.size() != laplacian.n)
        throw InvalidInput("frequency_gap_bound_check: dimension mismatch");
    if (std::abs(std::sqrt(dot(y_hat, y_hat)) - 1.0) > 1e-9 || std::abs(std::sqrt(dot(y, y)) - 1.0) > 1e-9)
        throw InvalidInput("frequency_gap_bound_check: inputs must be unit vectors");
    GapBound b;
    b.gap = std::abs(rayleigh_quotient(laplacian, y_hat) - rayleigh_quotient(laplacian, y));
    for (std::size_t i = 0; i < y.size(); ++i) b.sqnorm += (y_hat[i] - y[i]) * (y_hat[i] - y[i]);
    b.holds = b.sqnorm >= b.gap / 4.0 - 1e-9;
    b.holds_norm = std::sqrt(b.sqnorm) >= b.gap / 4.0 - 1e-9;
    return b;
}

}  // namespace sgf

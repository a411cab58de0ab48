#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sgf/error.hpp"
#include "sgf/generators.hpp"
#include "sgf/spectral.hpp"
#include "test_util.hpp"

using namespace sgf;
using namespace sgf::test;

namespace {

std::vector<double> column(const Eigen::MatrixXd& m, Eigen::Index j) {
    std::vector<double> v(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) v[i] = m(i, j);
    return v;
}

// Σ θ_i L^i evaluated densely.
Eigen::MatrixXd dense_polynomial(const Eigen::MatrixXd& l, const std::vector<double>& theta) {
    const Eigen::Index n = l.rows();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
    for (double t : theta) {
        acc += t * power;
        power = power * l;
    }
    return acc;
}

// Unrolled stacked recurrence applied to the identity.
Eigen::MatrixXd dense_stacked(const Eigen::MatrixXd& l, const std::vector<double>& a,
                              const std::vector<double>& b) {
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(l.rows(), l.cols());
    Eigen::MatrixXd h = id;
    for (std::size_t i = 0; i < a.size(); ++i) h = a[i] * l * h + b[i] * id;
    return h;
}

}  // namespace

TEST_CASE("rayleigh quotient closed forms and errors") {
    const std::vector<Edge> e{{0, 1}};
    const SparseOperator lap = normalized_laplacian(build_graph(2, e));
    const std::vector<double> x{1, -1};
    CHECK(rayleigh_quotient(lap, x) == doctest::Approx(2.0));
    CHECK_THROWS_AS(rayleigh_quotient(lap, std::vector<double>{0, 0}), InvalidInput);
    CHECK_THROWS_AS(rayleigh_quotient(lap, std::vector<double>{1, 0, 0}), InvalidInput);
    CHECK_THROWS_AS(rayleigh_quotient(augmented_adjacency(build_graph(2, e)), x), InvalidInput);

    Rng rng(3);
    const Graph g = random_graph(20, 0.3, rng);
    std::vector<double> root(20);
    for (Vertex u = 0; u < 20; ++u) root[u] = std::sqrt(static_cast<double>(g.degree(u)));
    CHECK(std::abs(rayleigh_quotient(normalized_laplacian(g), root)) < 1e-12);
}

TEST_CASE("rayleigh quotient of eigenvectors equals eigenvalues") {
    Rng rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        const Graph g = random_graph(16, 0.3, rng);
        const SparseOperator lap = normalized_laplacian(g);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            dense_laplacian(dense_adjacency(16, g.edge_list())));
        for (Eigen::Index i = 0; i < 16; ++i)
            CHECK(std::abs(rayleigh_quotient(lap, column(es.eigenvectors(), i)) -
                           es.eigenvalues()(i)) < 1e-8);
    }
}

TEST_CASE("label frequency extremes") {
    // K_{2,2}: 4-cycle 0-2-1-3-0
    const std::vector<Edge> c4{{0, 2}, {0, 3}, {1, 2}, {1, 3}};
    const Graph k22 = build_graph(4, c4);
    const std::vector<int> sides{0, 0, 1, 1};
    const FrequencyStats s = label_frequency(k22, sides, 2);
    CHECK(std::abs(s.mean - 2.0) < 1e-12);
    CHECK(s.std < 1e-12);
    CHECK_THROWS_AS(label_frequency(k22, std::vector<int>{0, 0, 0, 0}, 1), InvalidInput);

    const Dataset bip = generate_bipartite(300, 0.03, 4, 2);
    const FrequencyStats b = label_frequency(bip.graph, bip.labels, 2);
    CHECK(std::abs(b.mean - 2.0) < 0.05);
    CHECK(b.std < 1e-12);

    // side vector weighted by sqrt(degree) is an exact top eigenvector
    std::vector<double> w(bip.num_vertices());
    for (Vertex u = 0; u < w.size(); ++u)
        w[u] = (bip.labels[u] == 0 ? 1.0 : -1.0) * std::sqrt(static_cast<double>(bip.graph.degree(u)));
    CHECK(std::abs(rayleigh_quotient(normalized_laplacian(bip.graph), w) - 2.0) < 1e-9);

    const Dataset homo = generate_blockmodel(300, 3, 0.1, 0.005, 4, 1.0, 4);
    CHECK(label_frequency(homo.graph, homo.labels, 3).mean < 0.5);
}

TEST_CASE("random labels sit near frequency 1") {
    Rng rng(6);
    const Dataset d = generate_blockmodel(400, 2, 0.05, 0.05 * 0.999, 2, 1.0, 9);
    std::vector<int> labels(400);
    for (std::size_t i = 0; i < 400; ++i) labels[i] = static_cast<int>(i % 2);
    double sum = 0.0;
    for (int t = 0; t < 50; ++t) {
        std::shuffle(labels.begin(), labels.end(), rng);
        sum += label_frequency(d.graph, labels, 2).mean;
    }
    const double mean = sum / 50.0;
    CHECK(mean > 0.8);
    CHECK(mean < 1.2);
}

TEST_CASE("feature frequency skips zero columns") {
    const std::vector<Edge> e{{0, 1}, {1, 2}};
    const Graph g = build_graph(3, e);
    const DenseMatrix x(3, 2, {1, 0, -1, 0, 1, 0});
    const FrequencyStats s = feature_frequency(g, x);
    REQUIRE(s.per_component.size() == 1);
    const std::vector<double> col{1, -1, 1};
    CHECK(s.mean == doctest::Approx(rayleigh_quotient(normalized_laplacian(g), col)));
}

TEST_CASE("stacked_to_monomial closed forms") {
    const std::vector<double> a{0.5, 0.5}, b{0.5, 0.5};
    const MonomialFilter f = stacked_to_monomial(a, b, FilterBasis::Laplacian);
    CHECK(f.coeffs == std::vector<double>{0.5, 0.25, 0.25});

    const std::vector<double> a2{2.0, 3.0}, b2{5.0, 7.0};
    CHECK(stacked_to_monomial(a2, b2, FilterBasis::Laplacian).coeffs ==
          std::vector<double>{7.0, 3.0 * 5.0, 2.0 * 3.0});

    // all α = 1 reproduces any τ
    const std::vector<double> tau{0.3, -1.2, 0.7, 2.5};
    const std::vector<double> ones(3, 1.0);
    const std::vector<double> beta{tau[2], tau[1], tau[0]};
    const MonomialFilter g = stacked_to_monomial(ones, beta, FilterBasis::Laplacian);
    CHECK(g.coeffs.size() == 4);
    CHECK(g.coeffs[0] == tau[0]);
    CHECK(g.coeffs[1] == tau[1]);
    CHECK(g.coeffs[2] == tau[2]);
    CHECK(g.coeffs[3] == 1.0);

    CHECK_THROWS_AS(stacked_to_monomial(std::vector<double>{}, std::vector<double>{}, FilterBasis::Laplacian),
                    InvalidInput);
}

TEST_CASE("stacked_to_monomial matches the dense recurrence") {
    Rng rng(13);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t k = 1 + trial % 8, n = 6 + trial % 10;
        const Graph g = random_graph(n, 0.4, rng);
        const Eigen::MatrixXd l = dense_laplacian(dense_adjacency(n, g.edge_list()));
        std::vector<double> a(k), b(k);
        for (auto& v : a) v = u(rng);
        for (auto& v : b) v = u(rng);
        const MonomialFilter f = stacked_to_monomial(a, b, FilterBasis::Laplacian);
        CHECK((dense_polynomial(l, f.coeffs) - dense_stacked(l, a, b)).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("monomial_to_stacked round trips") {
    Rng rng(17);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> theta(2 + trial % 8);
        for (auto& v : theta) v = u(rng);
        const StackedCoefficients s = monomial_to_stacked(theta);
        const MonomialFilter back = stacked_to_monomial(s.alphas, s.betas, FilterBasis::Laplacian);
        REQUIRE(back.coeffs.size() == theta.size());
        for (std::size_t i = 0; i < theta.size(); ++i) CHECK(std::abs(back.coeffs[i] - theta[i]) < 1e-12);
    }

    const std::vector<double> id{1, 0, 0, 0};
    const StackedCoefficients s = monomial_to_stacked(id);
    CHECK(s.betas == std::vector<double>{0, 0, 1});
    CHECK(stacked_to_monomial(s.alphas, s.betas, FilterBasis::Laplacian).coeffs == id);

    const std::vector<double> spec{0.5, 0.25, 0.25};
    const StackedCoefficients t = monomial_to_stacked(spec);
    CHECK(stacked_to_monomial(t.alphas, t.betas, FilterBasis::Laplacian).coeffs == spec);

    CHECK_THROWS_AS(monomial_to_stacked(std::vector<double>{0, 0, 0}), InvalidInput);
}

TEST_CASE("cheby_to_monomial expansions") {
    CHECK(cheby_to_monomial(std::vector<double>{3.0}, 1.7).coeffs == std::vector<double>{3.0});
    CHECK(cheby_to_monomial(std::vector<double>{0, 1}, 2.0).coeffs == std::vector<double>{-1, 1});
    CHECK(cheby_to_monomial(std::vector<double>{0, 0, 1}, 2.0).coeffs == std::vector<double>{1, -4, 2});

    // against the Chebyshev recurrence evaluated pointwise
    Rng rng(19);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double lmax : {1.5, 2.0, 3.0}) {
        std::vector<double> theta(7);
        for (auto& v : theta) v = u(rng);
        const MonomialFilter f = cheby_to_monomial(theta, lmax);
        for (double lam = 0.0; lam <= 2.0; lam += 0.125) {
            const double x = 2.0 * lam / lmax - 1.0;
            double t0 = 1.0, t1 = x, want = theta[0] + theta[1] * x;
            for (std::size_t k = 2; k < theta.size(); ++k) {
                const double t2 = 2 * x * t1 - t0;
                want += theta[k] * t2;
                t0 = t1;
                t1 = t2;
            }
            CHECK(std::abs(evaluate_filter(f, lam) - want) < 1e-9 * std::max(1.0, std::abs(want)));
        }
    }
}

TEST_CASE("cheby leading coefficient grows by (4/3)^K at lambda_max 1.5") {
    for (std::size_t k = 1; k <= 10; ++k) {
        std::vector<double> theta(k + 1, 0.0);
        theta[k] = 1.0;
        const double lead2 = cheby_to_monomial(theta, 2.0).coeffs.back();
        const double lead15 = cheby_to_monomial(theta, 1.5).coeffs.back();
        CHECK(lead2 == doctest::Approx(std::ldexp(1.0, static_cast<int>(k) - 1)));
        CHECK(std::abs(lead15 / lead2 - std::pow(4.0 / 3.0, static_cast<double>(k))) < 1e-9);
    }
}

TEST_CASE("filter evaluation and response") {
    const MonomialFilter id{{1.0}, FilterBasis::Laplacian};
    const FilterResponse r = filter_response(id, 201);
    REQUIRE(r.lambdas.size() == 201);
    CHECK(r.lambdas.front() == 0.0);
    CHECK(r.lambdas.back() == 2.0);
    for (double v : r.values) CHECK(v == 1.0);

    const MonomialFilter ramp{{0.0, 1.0}, FilterBasis::Laplacian};
    const FilterResponse rr = filter_response(ramp, 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(rr.values[i] == doctest::Approx(rr.lambdas[i]));

    const MonomialFilter aug{{0.0, 1.0}, FilterBasis::AugmentedAdjacency};
    CHECK(evaluate_filter(aug, 0.25) == doctest::Approx(0.75));
    CHECK_THROWS_AS(filter_response(id, 1), InvalidInput);
}

TEST_CASE("estimator at full observation equals the naive quotient") {
    const Dataset d = generate_blockmodel(200, 2, 0.05, 0.02, 2, 1.0, 3);
    const std::vector<bool> all(200, true);
    const SampleEstimate e = estimate_label_frequency(d.graph, d.labels, 2, all, 1.0);
    CHECK(e.sample_size == 200);
    CHECK(std::abs(e.estimate - e.naive) < 1e-12);
    CHECK(std::abs(e.naive - label_frequency(d.graph, d.labels, 2).mean) < 1e-12);

    const std::vector<double> y(3, 0.5);
    CHECK(estimate_rayleigh(normalized_laplacian(build_graph(3, {})), y, 0.4, 10) == 0.0);
    CHECK_THROWS_AS(estimate_rayleigh(normalized_laplacian(build_graph(3, {})), y, 0.0, 10),
                    InvalidInput);
}

TEST_CASE("estimator spread shrinks with the sampling rate") {
    const Dataset d = generate_blockmodel(200, 2, 0.08, 0.02, 2, 1.0, 5);
    std::vector<double> spread;
    for (double p : {0.1, 0.5, 0.9}) {
        Rng rng(derive_rng(23, static_cast<std::uint64_t>(p * 10)));
        std::vector<double> est;
        for (int t = 0; t < 200; ++t) {
            const auto sample = bernoulli_sample(200, p, rng);
            std::vector<int> labels;
            for (std::size_t u = 0; u < 200; ++u)
                if (sample[u]) labels.push_back(d.labels[u]);
            if (std::count(labels.begin(), labels.end(), 0) == 0 ||
                std::count(labels.begin(), labels.end(), 1) == 0)
                continue;
            est.push_back(estimate_label_frequency(d.graph, d.labels, 2, sample, p).estimate);
        }
        const double mean = std::accumulate(est.begin(), est.end(), 0.0) / est.size();
        double var = 0.0;
        for (double v : est) var += (v - mean) * (v - mean);
        spread.push_back(std::sqrt(var / (est.size() - 1)));
    }
    CHECK(spread[0] > spread[1]);
    CHECK(spread[1] > spread[2]);
}

TEST_CASE("bernoulli sample") {
    Rng rng(29);
    const auto all = bernoulli_sample(50, 1.0, rng);
    CHECK(std::all_of(all.begin(), all.end(), [](bool b) { return b; }));
    for (int t = 0; t < 20; ++t) {
        const auto tiny = bernoulli_sample(3, 0.01, rng);
        CHECK(std::any_of(tiny.begin(), tiny.end(), [](bool b) { return b; }));
    }
    CHECK_THROWS_AS(bernoulli_sample(10, 0.0, rng), InvalidInput);
    CHECK_THROWS_AS(bernoulli_sample(10, 1.5, rng), InvalidInput);
}

TEST_CASE("frequency gap bound") {
    const std::vector<Edge> e{{0, 1}};
    const SparseOperator lap = normalized_laplacian(build_graph(2, e));
    const double s = 1.0 / std::sqrt(2.0);
    const std::vector<double> hi{s, -s}, lo{s, s};
    const GapBound same = frequency_gap_bound_check(lo, lo, lap);
    CHECK(same.gap == 0.0);
    CHECK(same.sqnorm == 0.0);
    CHECK(same.holds);

    const GapBound b = frequency_gap_bound_check(hi, lo, lap);
    CHECK(b.gap == doctest::Approx(2.0));
    CHECK(b.sqnorm == doctest::Approx(2.0));
    CHECK(b.holds);
    CHECK(b.holds_norm);
    CHECK_THROWS_AS(frequency_gap_bound_check(std::vector<double>{1, 1}, lo, lap), InvalidInput);

    // nearby vectors violate the squared form but not the norm form
    const double t = 1e-3;
    const std::vector<double> y{1, 0}, yh{std::cos(t), std::sin(t)};
    const GapBound near = frequency_gap_bound_check(yh, y, lap);
    CHECK_FALSE(near.holds);
    CHECK(near.holds_norm);

    Rng rng(31);
    int squared_held = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Graph g = random_graph(30, 0.2, rng);
        const SparseOperator l = normalized_laplacian(g);
        DenseMatrix a = random_matrix(30, 1, rng), c = random_matrix(30, 1, rng);
        a *= 1.0 / std::sqrt(inner(a, a));
        c *= 1.0 / std::sqrt(inner(c, c));
        const GapBound r = frequency_gap_bound_check(a.data(), c.data(), l);
        CHECK(r.holds_norm);
        squared_held += r.holds ? 1 : 0;
    }
    CHECK(squared_held == 1000);
}

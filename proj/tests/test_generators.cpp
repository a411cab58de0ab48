#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sgf/error.hpp"
#include "sgf/generators.hpp"
#include "sgf/spectral.hpp"
#include "sgf/training.hpp"
#include "test_util.hpp"

using namespace sgf;
using namespace sgf::test;

namespace {

std::vector<std::size_t> sorted_degrees(const Graph& g) {
    std::vector<std::size_t> d = g.degrees();
    std::sort(d.begin(), d.end());
    return d;
}

double side_quotient(const Dataset& d) {
    std::vector<double> y(d.num_vertices());
    for (std::size_t u = 0; u < y.size(); ++u) y[u] = d.labels[u] == 0 ? 1.0 : -1.0;
    return rayleigh_quotient(normalized_laplacian(d.graph), y);
}

}  // namespace

TEST_CASE("bipartite generator at the reference size") {
    BipartiteInfo info;
    const Dataset d = generate_bipartite(1000, 0.025, 50, 1, &info);
    CHECK_NOTHROW(d.validate());
    CHECK(d.num_vertices() == 2000);
    CHECK(d.num_classes == 2);
    CHECK(d.feature_dim() == 50);
    CHECK(connected_components(d.graph).second == 1);

    const double mean = 1e6 * 0.025, sigma = std::sqrt(1e6 * 0.025 * 0.975);
    CHECK(std::abs(static_cast<double>(info.sampled_edges) - mean) < 3 * sigma);
    CHECK(d.graph.num_edges() == info.sampled_edges + info.patch_edges);
    for (auto [u, v] : d.graph.edge_list()) CHECK(d.labels[u] != d.labels[v]);
    CHECK(std::count(d.labels.begin(), d.labels.end(), 0) == 1000);

    CHECK(std::abs(side_quotient(d) - 2.0) < 0.05);
    CHECK(std::abs(label_frequency(d.graph, d.labels, 2).mean - 2.0) < 0.05);
}

TEST_CASE("bipartite generator is deterministic and seed dependent") {
    const Dataset a = generate_bipartite(100, 0.05, 3, 7);
    const Dataset b = generate_bipartite(100, 0.05, 3, 7);
    const Dataset c = generate_bipartite(100, 0.05, 3, 8);
    CHECK(a.graph == b.graph);
    CHECK(a.features == b.features);
    CHECK_FALSE(a.graph == c.graph);
}

TEST_CASE("bipartite generator extremes") {
    const Dataset k22 = generate_bipartite(2, 1.0, 1, 3);
    CHECK(k22.graph.num_edges() == 4);
    CHECK(std::abs(side_quotient(k22) - 2.0) < 1e-12);
    CHECK_THROWS_AS(generate_bipartite(500, 0.0005, 2, 1), GenerationFailed);
}

TEST_CASE("blockmodel generator") {
    const Dataset d = generate_blockmodel(1000, 4, 0.1, 0.005, 8, 1.0, 3);
    CHECK_NOTHROW(d.validate());
    CHECK(d.num_classes == 4);
    for (std::size_t u = 0; u < d.num_vertices(); ++u) CHECK(d.labels[u] == static_cast<int>(u % 4));
    CHECK(label_frequency(d.graph, d.labels, 4).mean < 0.5);
    CHECK(generate_blockmodel(1000, 4, 0.1, 0.005, 8, 1.0, 3).graph == d.graph);

    CHECK_THROWS_AS(generate_blockmodel(100, 2, 0.1, 0.1, 2, 1.0, 1), InvalidInput);
    CHECK_THROWS_AS(generate_blockmodel(3, 4, 0.5, 0.1, 2, 1.0, 1), InvalidInput);
    CHECK_THROWS_AS(generate_blockmodel(100, 2, 1.5, 0.1, 2, 1.0, 1), InvalidInput);
}

TEST_CASE("uninformative features leave the MLP at chance") {
    const Dataset d = generate_blockmodel(4000, 4, 0.01, 0.001, 16, 0.0, 5);
    TrainConfig cfg;
    cfg.variant = Variant::Mlp;
    cfg.max_epochs = 200;
    cfg.min_epochs = 0;
    cfg.patience = 50;
    cfg.hidden = 16;
    const MultiRunResult r = multi_run(d, cfg, 3);
    CHECK(std::abs(r.mean_test - 0.25) < 0.05);
}

TEST_CASE("degree preserving rewire") {
    const Dataset d = generate_blockmodel(600, 3, 0.05, 0.002, 2, 1.0, 9);
    const RewireResult none = degree_preserving_rewire(d.graph, 0.0, 1);
    CHECK(none.graph == d.graph);
    CHECK(none.requested_swaps == 0);

    for (double frac : {0.1, 0.5, 0.9}) {
        const RewireResult r = degree_preserving_rewire(d.graph, frac, 2);
        CHECK(r.graph.degrees() == d.graph.degrees());
        CHECK(r.graph.num_edges() == d.graph.num_edges());
        CHECK(r.requested_swaps ==
              static_cast<std::size_t>(std::ceil(frac * static_cast<double>(d.graph.num_edges()) / 2.0)));
        CHECK(r.achieved_swaps + r.skipped_swaps == r.requested_swaps);
        CHECK(r.achieved_swaps > 0);
    }

    const double before = label_frequency(d.graph, d.labels, 3).mean;
    const double after = label_frequency(degree_preserving_rewire(d.graph, 0.9, 3).graph, d.labels, 3).mean;
    CHECK(std::abs(after - 1.0) < std::abs(before - 1.0));
    CHECK(degree_preserving_rewire(d.graph, 0.5, 4).graph == degree_preserving_rewire(d.graph, 0.5, 4).graph);
    CHECK_THROWS_AS(degree_preserving_rewire(d.graph, 1.5, 4), InvalidInput);
}

TEST_CASE("rewire keeps the sorted degree sequence on random graphs") {
    Rng rng(10);
    for (int trial = 0; trial < 10; ++trial) {
        const Graph g = random_graph(40, 0.15, rng);
        CHECK(sorted_degrees(degree_preserving_rewire(g, 1.0, trial).graph) == sorted_degrees(g));
    }
}

TEST_CASE("stratified split") {
    const std::vector<int> one(10, 0);
    const Split s = stratified_split(one, 1, 1);
    CHECK(s.count_train() == 6);
    CHECK(s.count_val() == 2);
    CHECK(s.count_test() == 2);
    for (std::size_t u = 0; u < 10; ++u) CHECK(int(s.train[u]) + int(s.val[u]) + int(s.test[u]) == 1);

    std::vector<int> labels;
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 7 + 4 * c; ++i) labels.push_back(c);
    const Split a = stratified_split(labels, 3, 5);
    const Split b = stratified_split(labels, 3, 5);
    CHECK(a.train == b.train);
    CHECK(a.val == b.val);
    CHECK_FALSE(stratified_split(labels, 3, 6).train == a.train);
    CHECK_NOTHROW(a.validate(labels, 3));

    std::size_t expect_train = 0;
    for (int c = 0; c < 3; ++c) expect_train += split_sizes(7 + 4 * c, {0.6, 0.2, 0.2})[0];
    CHECK(a.count_train() == expect_train);
    CHECK(a.count_train() + a.count_val() + a.count_test() == labels.size());

    CHECK(split_sizes(10, {0.6, 0.2, 0.2}) == std::array<std::size_t, 3>{6, 2, 2});
    CHECK(split_sizes(7, {0.6, 0.2, 0.2}) == std::array<std::size_t, 3>{4, 2, 1});

    const std::vector<int> tiny{0, 0, 0, 1, 1};
    CHECK_THROWS_AS(stratified_split(tiny, 2, 1), InvalidInput);
}

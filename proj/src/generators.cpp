#include "sgf/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <unordered_set>

#include "sgf/error.hpp"
#include "sgf/rng.hpp"

namespace sgf {

namespace {

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    DenseMatrix m(rows, cols);
    for (double& v : m.data()) v = normal(rng);
    return m;
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

Dataset generate_bipartite(std::size_t n_per_side, double density, std::size_t feat_dim,
                           std::uint64_t seed, BipartiteInfo* info) {
    if (n_per_side < 2) throw InvalidInput("generate_bipartite: n_per_side must be >= 2");
    if (!(density > 0.0 && density <= 1.0))
        throw InvalidInput("generate_bipartite: density must be in (0, 1]");
    if (feat_dim == 0) throw InvalidInput("generate_bipartite: feat_dim must be >= 1");

    const std::size_t n = 2 * n_per_side;
    Rng rng = derive_rng(seed, 0xB1);
    std::bernoulli_distribution coin(density);
    std::vector<Edge> edges;
    for (std::size_t u = 0; u < n_per_side; ++u) {
        for (std::size_t v = n_per_side; v < n; ++v) {
            if (coin(rng)) edges.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
        }
    }
    const std::size_t sampled = edges.size();

    // Join every component to the one containing the most vertices. An edge
    // must cross sides, so a component living on one side only can attach
    // only to a main-component vertex of the other side.
    Graph g = build_graph(n, edges);
    auto [comp, num_comp] = connected_components(g);
    std::vector<std::vector<Vertex>> members(num_comp);
    for (Vertex u = 0; u < n; ++u) members[comp[u]].push_back(u);
    std::size_t main = 0;
    for (std::size_t c = 1; c < num_comp; ++c)
        if (members[c].size() > members[main].size()) main = c;

    auto side = [&](Vertex u) { return u < n_per_side ? 0 : 1; };
    std::array<std::vector<Vertex>, 2> main_by_side;
    for (Vertex u : members[main]) main_by_side[side(u)].push_back(u);

    std::vector<std::size_t> pending;
    for (std::size_t c = 0; c < num_comp; ++c)
        if (c != main) pending.push_back(c);
    std::shuffle(pending.begin(), pending.end(), rng);

    std::size_t patches = 0;
    while (!pending.empty()) {
        std::vector<std::size_t> deferred;
        for (std::size_t c : pending) {
            std::vector<Vertex> usable;
            for (Vertex u : members[c])
                if (!main_by_side[1 - side(u)].empty()) usable.push_back(u);
            if (usable.empty()) {
                deferred.push_back(c);
                continue;
            }
            const Vertex u = usable[uniform_index(rng, usable.size())];
            const auto& targets = main_by_side[1 - side(u)];
            const Vertex v = targets[uniform_index(rng, targets.size())];
            edges.emplace_back(std::min(u, v), std::max(u, v));
            ++patches;
            for (Vertex w : members[c]) main_by_side[side(w)].push_back(w);
        }
        if (deferred.size() == pending.size()) {
            throw GenerationFailed("generate_bipartite: cannot connect components");
        }
        pending = std::move(deferred);
    }

    const double target = density * static_cast<double>(n_per_side * n_per_side);
    if (static_cast<double>(patches) > 0.1 * target) {
        throw GenerationFailed("generate_bipartite: connectivity patch needs " +
                               std::to_string(patches) + " edges, more than 10% of the " +
                               std::to_string(static_cast<long long>(target)) + " expected");
    }
    if (info) *info = {sampled, patches};

    Dataset ds;
    ds.name = "bipartite";
    ds.graph = build_graph(n, edges);
    Rng feat_rng = derive_rng(seed, 0xB2);
    ds.features = gaussian_matrix(n, feat_dim, feat_rng);
    ds.labels.resize(n);
    for (Vertex u = 0; u < n; ++u) ds.labels[u] = side(u);
    ds.num_classes = 2;
    return ds;
}

Dataset generate_blockmodel(std::size_t n, std::size_t k_blocks, double p_in, double p_out,
                            std::size_t feat_dim, double feature_signal, std::uint64_t seed) {
    if (k_blocks == 0 || n < k_blocks)
        throw InvalidInput("generate_blockmodel: every block needs at least one vertex");
    if (!(p_out >= 0.0 && p_out < p_in && p_in <= 1.0))
        throw InvalidInput("generate_blockmodel: requires 0 <= p_out < p_in <= 1");
    if (feat_dim == 0) throw InvalidInput("generate_blockmodel: feat_dim must be >= 1");

    Rng rng = derive_rng(seed, 0xC1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Edge> edges;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            const double p = (u % k_blocks == v % k_blocks) ? p_in : p_out;
            if (unif(rng) < p) edges.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
        }
    }

    Dataset ds;
    ds.name = "blockmodel";
    ds.graph = build_graph(n, edges);
    ds.num_classes = static_cast<int>(k_blocks);
    ds.labels.resize(n);
    for (std::size_t u = 0; u < n; ++u) ds.labels[u] = static_cast<int>(u % k_blocks);

    Rng feat_rng = derive_rng(seed, 0xC2);
    DenseMatrix means = gaussian_matrix(k_blocks, feat_dim, feat_rng);
    means *= feature_signal;
    ds.features = gaussian_matrix(n, feat_dim, feat_rng);
    for (std::size_t u = 0; u < n; ++u) {
        auto mean = means.row(u % k_blocks);
        auto row = ds.features.row(u);
        for (std::size_t j = 0; j < feat_dim; ++j) row[j] += mean[j];
    }
    return ds;
}

RewireResult degree_preserving_rewire(const Graph& g, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0))
        throw InvalidInput("degree_preserving_rewire: fraction must be in [0, 1]");
    const std::size_t n = g.num_vertices();
    std::vector<Edge> edges = g.edge_list();
    const std::size_t m = edges.size();

    RewireResult result;
    result.requested_swaps = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(m) / 2.0 - 1e-9));
    if (result.requested_swaps == 0) {
        result.graph = g;
        return result;
    }

    auto key = [n](Vertex u, Vertex v) {
        return static_cast<std::uint64_t>(std::min(u, v)) * n + std::max(u, v);
    };
    std::unordered_set<std::uint64_t> present;
    present.reserve(2 * m);
    for (auto [u, v] : edges) present.insert(key(u, v));

    Rng rng = derive_rng(seed, 0xD1);
    for (std::size_t s = 0; s < result.requested_swaps; ++s) {
        bool done = false;
        for (int attempt = 0; attempt < kSwapRetryBudget && m >= 2 && !done; ++attempt) {
            const std::size_t i = uniform_index(rng, m);
            std::size_t j = uniform_index(rng, m - 1);
            if (j >= i) ++j;
            auto [a, b] = edges[i];
            auto [c, d] = edges[j];
            if (std::bernoulli_distribution(0.5)(rng)) std::swap(c, d);
            // (a,b),(c,d) -> (a,d),(c,b)
            if (a == c || a == d || b == c || b == d) continue;
            if (present.contains(key(a, d)) || present.contains(key(c, b))) continue;
            present.erase(key(a, b));
            present.erase(key(c, d));
            present.insert(key(a, d));
            present.insert(key(c, b));
            edges[i] = {std::min(a, d), std::max(a, d)};
            edges[j] = {std::min(c, b), std::max(c, b)};
            done = true;
        }
        if (done) {
            ++result.achieved_swaps;
        } else {
            ++result.skipped_swaps;
        }
    }
    result.graph = build_graph(n, edges);
    return result;
}

std::array<std::size_t, 3> split_sizes(std::size_t count, std::array<double, 3> ratios) {
    std::array<std::size_t, 3> sizes{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (int k = 0; k < 3; ++k) {
        const double exact = ratios[k] * static_cast<double>(count);
        sizes[k] = static_cast<std::size_t>(std::floor(exact + 1e-9));
        remainder[k] = exact - static_cast<double>(sizes[k]);
        assigned += sizes[k];
    }
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return remainder[x] > remainder[y] + 1e-12; });
    for (std::size_t r = 0; assigned < count; ++r, ++assigned) ++sizes[order[r % 3]];
    return sizes;
}

Split stratified_split(const std::vector<int>& labels, int num_classes,
                       std::array<double, 3> ratios, std::uint64_t seed) {
    if (num_classes < 1) throw InvalidInput("stratified_split: num_classes must be >= 1");
    for (double r : ratios)
        if (r < 0.0) throw InvalidInput("stratified_split: negative ratio");
    if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9)
        throw InvalidInput("stratified_split: ratios must sum to 1");

    std::vector<std::vector<Vertex>> by_class(static_cast<std::size_t>(num_classes));
    for (std::size_t u = 0; u < labels.size(); ++u) {
        if (labels[u] < 0 || labels[u] >= num_classes)
            throw InvalidInput("stratified_split: label out of range at vertex " + std::to_string(u));
        by_class[static_cast<std::size_t>(labels[u])].push_back(static_cast<Vertex>(u));
    }

    const std::size_t n = labels.size();
    Split split{std::vector<bool>(n), std::vector<bool>(n), std::vector<bool>(n)};
    Rng rng = derive_rng(seed, 0xE1);
    for (int c = 0; c < num_classes; ++c) {
        auto& members = by_class[static_cast<std::size_t>(c)];
        if (members.size() < 3) {
            throw InvalidInput("stratified_split: class " + std::to_string(c) + " has " +
                               std::to_string(members.size()) + " members, need >= 3");
        }
        std::shuffle(members.begin(), members.end(), rng);
        const auto sizes = split_sizes(members.size(), ratios);
        std::size_t pos = 0;
        for (std::size_t i = 0; i < sizes[0]; ++i) split.train[members[pos++]] = true;
        for (std::size_t i = 0; i < sizes[1]; ++i) split.val[members[pos++]] = true;
        for (std::size_t i = 0; i < sizes[2]; ++i) split.test[members[pos++]] = true;
    }
    return split;
}

}  // namespace sgf

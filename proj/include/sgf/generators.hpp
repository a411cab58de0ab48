#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sgf/dataset.hpp"

namespace sgf {

struct BipartiteInfo {
    std::size_t sampled_edges = 0;
    std::size_t patch_edges = 0;  // added to make the graph connected
};

/// Random bipartite graph on 2·n_per_side vertices. Each cross pair is an
/// edge with probability `density`; components are then joined by random
/// cross edges. Labels are the side (0 for vertices [0, n_per_side)),
/// features are i.i.d. N(0, 1).
///
/// Throws GenerationFailed when patching needs more than 10% of the
/// expected edge count density·n_per_side².
Dataset generate_bipartite(std::size_t n_per_side, double density, std::size_t feat_dim,
                           std::uint64_t seed, BipartiteInfo* info = nullptr);

/// Planted partition: vertex u belongs to block u % k_blocks. Pairs in the
/// same block are joined with p_in, others with p_out. Features are a
/// per-class mean drawn as feature_signal·N(0, I) plus unit Gaussian noise.
Dataset generate_blockmodel(std::size_t n, std::size_t k_blocks, double p_in, double p_out,
                            std::size_t feat_dim, double feature_signal, std::uint64_t seed);

struct RewireResult {
    Graph graph;
    std::size_t requested_swaps = 0;
    std::size_t achieved_swaps = 0;
    std::size_t skipped_swaps = 0;  // exhausted the retry budget
};

inline constexpr int kSwapRetryBudget = 100;

/// Degree-preserving randomization by ceil(fraction·m/2) double-edge swaps.
RewireResult degree_preserving_rewire(const Graph& g, double fraction, std::uint64_t seed);

/// Per-class shuffled partition; per-class sizes use largest-remainder
/// rounding of count·ratio (ties go to train, then val, then test).
Split stratified_split(const std::vector<int>& labels, int num_classes,
                       std::array<double, 3> ratios, std::uint64_t seed);

inline Split stratified_split(const std::vector<int>& labels, int num_classes,
                              std::uint64_t seed) {
    return stratified_split(labels, num_classes, {0.6, 0.2, 0.2}, seed);
}

/// Per-class (train, val, test) sizes the split will produce for `count` members.
std::array<std::size_t, 3> split_sizes(std::size_t count, std::array<double, 3> ratios);

}  // namespace sgf

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgf/graph.hpp"
#include "sgf/tensor.hpp"

namespace sgf {

/// Attributed graph with integer vertex labels.
struct Dataset {
    std::string name;
    Graph graph;
    DenseMatrix features;  // n x d
    std::vector<int> labels;
    int num_classes = 0;

    std::size_t num_vertices() const noexcept { return graph.num_vertices(); }
    std::size_t feature_dim() const noexcept { return features.cols(); }

    /// Throws InvalidInput when row counts disagree, a label is out of
    /// range, or a class has no members.
    void validate() const;
};

struct Split {
    std::vector<bool> train;
    std::vector<bool> val;
    std::vector<bool> test;

    std::size_t count_train() const;
    std::size_t count_val() const;
    std::size_t count_test() const;

    /// Masks disjoint, of length n, every class present in train.
    void validate(const std::vector<int>& labels, int num_classes) const;
};

}  // namespace sgf

#include "sgf/dataset.hpp"

#include <algorithm>
#include <string>

#include "sgf/error.hpp"

namespace sgf {

void Dataset::validate() const {
    const std::size_t n = graph.num_vertices();
    if (features.rows() != n)
        throw InvalidInput("Dataset: feature rows " + std::to_string(features.rows()) +
                           " != vertex count " + std::to_string(n));
    if (labels.size() != n)
        throw InvalidInput("Dataset: label count " + std::to_string(labels.size()) +
                           " != vertex count " + std::to_string(n));
    if (num_classes < 1) throw InvalidInput("Dataset: num_classes must be >= 1");
    std::vector<bool> seen(static_cast<std::size_t>(num_classes), false);
    for (std::size_t u = 0; u < n; ++u) {
        if (labels[u] < 0 || labels[u] >= num_classes)
            throw InvalidInput("Dataset: label " + std::to_string(labels[u]) + " at vertex " +
                               std::to_string(u) + " outside [0, " + std::to_string(num_classes) +
                               ")");
        seen[static_cast<std::size_t>(labels[u])] = true;
    }
    auto missing = std::find(seen.begin(), seen.end(), false);
    if (missing != seen.end())
        throw InvalidInput("Dataset: class " + std::to_string(missing - seen.begin()) +
                           " has no members");
    if (!features.all_finite()) throw InvalidInput("Dataset: non-finite feature value");
}

static std::size_t count_true(const std::vector<bool>& m) {
    return static_cast<std::size_t>(std::count(m.begin(), m.end(), true));
}

std::size_t Split::count_train() const { return count_true(train); }
std::size_t Split::count_val() const { return count_true(val); }
std::size_t Split::count_test() const { return count_true(test); }

void Split::validate(const std::vector<int>& labels, int num_classes) const {
    const std::size_t n = labels.size();
    if (train.size() != n || val.size() != n || test.size() != n)
        throw InvalidInput("Split: mask length does not match vertex count");
    std::vector<bool> in_train(static_cast<std::size_t>(num_classes), false);
    for (std::size_t u = 0; u < n; ++u) {
        if (int(train[u]) + int(val[u]) + int(test[u]) > 1)
            throw InvalidInput("Split: masks overlap at vertex " + std::to_string(u));
        if (train[u]) in_train[static_cast<std::size_t>(labels[u])] = true;
    }
    for (int c = 0; c < num_classes; ++c)
        if (!in_train[static_cast<std::size_t>(c)])
            throw InvalidInput("Split: class " + std::to_string(c) + " absent from train mask");
}

}  // namespace sgf

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sgf/tensor.hpp"

namespace sgf {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;

/// Simple undirected graph in compressed-row form. Every edge is stored in
/// both endpoint rows; rows are sorted ascending; no self-loops or duplicates.
class Graph {
public:
    Graph() = default;

    /// Validates the CSR arrays against the class invariants.
    static Graph from_csr(std::size_t n, std::vector<std::size_t> row_offsets,
                          std::vector<Vertex> col_indices);

    std::size_t num_vertices() const noexcept { return n_; }
    /// Undirected edge count (half the stored entries).
    std::size_t num_edges() const noexcept { return col_indices_.size() / 2; }

    std::size_t degree(Vertex u) const noexcept { return row_offsets_[u + 1] - row_offsets_[u]; }
    std::span<const Vertex> neighbors(Vertex u) const noexcept {
        return {col_indices_.data() + row_offsets_[u], degree(u)};
    }
    bool has_edge(Vertex u, Vertex v) const noexcept;

    std::vector<std::size_t> degrees() const;
    /// Each undirected edge once as (u, v) with u < v, lexicographically sorted.
    std::vector<Edge> edge_list() const;

    const std::vector<std::size_t>& row_offsets() const noexcept { return row_offsets_; }
    const std::vector<Vertex>& col_indices() const noexcept { return col_indices_; }

    bool operator==(const Graph&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_offsets_{0};
    std::vector<Vertex> col_indices_;
};

/// Symmetrizes, drops self-loops and duplicates, sorts rows.
Graph build_graph(std::size_t n, std::span<const Edge> edges);

/// Subgraph induced by the vertices with mask[u] == true, relabelled in
/// ascending order of original index.
Graph induced_subgraph(const Graph& g, const std::vector<bool>& mask);

/// Component id per vertex (ids assigned in order of lowest vertex) and the count.
std::pair<std::vector<std::uint32_t>, std::size_t> connected_components(const Graph& g);

enum class OperatorKind { NormalizedLaplacian, AugmentedAdjacency, ScaledChebyshevBase };

const char* to_string(OperatorKind k);

/// Symmetric sparse operator sharing a graph-like CSR layout. Unlike Graph,
/// rows may carry a diagonal entry. Column indices are ascending per row.
struct SparseOperator {
    OperatorKind kind = OperatorKind::NormalizedLaplacian;
    std::size_t n = 0;
    std::vector<std::size_t> row_offsets{0};
    std::vector<Vertex> col_indices;
    std::vector<double> values;

    double diagonal(Vertex u) const noexcept;
    bool is_symmetric() const;
    DenseMatrix to_dense() const;
};

/// D^{-1/2}(D - A)D^{-1/2}, with D^{-1/2} = 0 at isolated vertices.
SparseOperator normalized_laplacian(const Graph& g);
/// I - (D+I)^{-1/2} L (D+I)^{-1/2} = (D+I)^{-1/2}(A+I)(D+I)^{-1/2}.
SparseOperator augmented_adjacency(const Graph& g);
/// (2/lambda_max)·𝓛 - I, the argument of the Chebyshev recurrence.
SparseOperator scaled_chebyshev_operator(const Graph& g, double lambda_max);

/// op · x, summing each row in ascending column order.
DenseMatrix spmm(const SparseOperator& op, const DenseMatrix& x);
/// Writes op · x into out (resized as needed).
void spmm_into(const SparseOperator& op, const DenseMatrix& x, DenseMatrix& out);
std::vector<double> spmv(const SparseOperator& op, std::span<const double> x);

}  // namespace sgf

#include "sgf/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sgf/error.hpp"

namespace sgf {

Graph Graph::from_csr(std::size_t n, std::vector<std::size_t> row_offsets,
                      std::vector<Vertex> col_indices) {
    if (row_offsets.size() != n + 1 || row_offsets.front() != 0 ||
        row_offsets.back() != col_indices.size()) {
        throw InvalidInput("Graph: row_offsets inconsistent with col_indices");
    }
    for (std::size_t u = 0; u < n; ++u) {
        if (row_offsets[u] > row_offsets[u + 1]) throw InvalidInput("Graph: decreasing row_offsets");
        for (std::size_t k = row_offsets[u]; k < row_offsets[u + 1]; ++k) {
            const Vertex v = col_indices[k];
            if (v >= n) throw InvalidInput("Graph: column index out of range");
            if (v == u) throw InvalidInput("Graph: self-loop at " + std::to_string(u));
            if (k > row_offsets[u] && col_indices[k - 1] >= v) {
                throw InvalidInput("Graph: row " + std::to_string(u) + " not strictly ascending");
            }
        }
    }
    Graph g;
    g.n_ = n;
    g.row_offsets_ = std::move(row_offsets);
    g.col_indices_ = std::move(col_indices);
    for (Vertex u = 0; u < n; ++u) {
        for (Vertex v : g.neighbors(u)) {
            if (!g.has_edge(v, u)) throw InvalidInput("Graph: adjacency not symmetric");
        }
    }
    return g;
}

bool Graph::has_edge(Vertex u, Vertex v) const noexcept {
    if (u >= n_ || v >= n_) return false;
    auto row = neighbors(u);
    return std::binary_search(row.begin(), row.end(), v);
}

std::vector<std::size_t> Graph::degrees() const {
    std::vector<std::size_t> d(n_);
    for (Vertex u = 0; u < n_; ++u) d[u] = degree(u);
    return d;
}

std::vector<Edge> Graph::edge_list() const {
    std::vector<Edge> edges;
    edges.reserve(num_edges());
    for (Vertex u = 0; u < n_; ++u) {
        for (Vertex v : neighbors(u)) {
            if (u < v) edges.emplace_back(u, v);
        }
    }
    return edges;
}

Graph build_graph(std::size_t n, std::span<const Edge> edges) {
    std::vector<Edge> directed;
    directed.reserve(edges.size() * 2);
    for (auto [u, v] : edges) {
        if (u >= n || v >= n) {
            throw InvalidInput("build_graph: edge (" + std::to_string(u) + "," + std::to_string(v) +
                               ") out of range for n=" + std::to_string(n));
        }
        if (u == v) continue;
        directed.emplace_back(u, v);
        directed.emplace_back(v, u);
    }
    std::sort(directed.begin(), directed.end());
    directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

    std::vector<std::size_t> offsets(n + 1, 0);
    std::vector<Vertex> cols;
    cols.reserve(directed.size());
    for (auto [u, v] : directed) {
        ++offsets[u + 1];
        cols.push_back(v);
    }
    for (std::size_t u = 0; u < n; ++u) offsets[u + 1] += offsets[u];
    return Graph::from_csr(n, std::move(offsets), std::move(cols));
}

Graph induced_subgraph(const Graph& g, const std::vector<bool>& mask) {
    const std::size_t n = g.num_vertices();
    if (mask.size() != n) throw InvalidInput("induced_subgraph: mask length mismatch");
    std::vector<std::int64_t> relabel(n, -1);
    std::size_t next = 0;
    for (std::size_t u = 0; u < n; ++u) {
        if (mask[u]) relabel[u] = static_cast<std::int64_t>(next++);
    }
    std::vector<std::size_t> offsets{0};
    std::vector<Vertex> cols;
    for (Vertex u = 0; u < n; ++u) {
        if (!mask[u]) continue;
        for (Vertex v : g.neighbors(u)) {
            if (mask[v]) cols.push_back(static_cast<Vertex>(relabel[v]));
        }
        offsets.push_back(cols.size());
    }
    return Graph::from_csr(next, std::move(offsets), std::move(cols));
}

std::pair<std::vector<std::uint32_t>, std::size_t> connected_components(const Graph& g) {
    const std::size_t n = g.num_vertices();
    constexpr auto unset = static_cast<std::uint32_t>(-1);
    std::vector<std::uint32_t> comp(n, unset);
    std::vector<Vertex> stack;
    std::uint32_t count = 0;
    for (Vertex s = 0; s < n; ++s) {
        if (comp[s] != unset) continue;
        comp[s] = count;
        stack.push_back(s);
        while (!stack.empty()) {
            const Vertex u = stack.back();
            stack.pop_back();
            for (Vertex v : g.neighbors(u)) {
                if (comp[v] == unset) {
                    comp[v] = count;
                    stack.push_back(v);
                }
            }
        }
        ++count;
    }
    return {std::move(comp), count};
}

const char* to_string(OperatorKind k) {
    switch (k) {
        case OperatorKind::NormalizedLaplacian: return "laplacian";
        case OperatorKind::AugmentedAdjacency: return "augmented_adjacency";
        case OperatorKind::ScaledChebyshevBase: return "scaled_chebyshev";
    }
    return "unknown";
}

double SparseOperator::diagonal(Vertex u) const noexcept {
    auto begin = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[u]);
    auto end = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[u + 1]);
    auto it = std::lower_bound(begin, end, u);
    if (it != end && *it == u) return values[static_cast<std::size_t>(it - col_indices.begin())];
    return 0.0;
}

bool SparseOperator::is_symmetric() const {
    for (Vertex u = 0; u < n; ++u) {
        for (std::size_t k = row_offsets[u]; k < row_offsets[u + 1]; ++k) {
            const Vertex v = col_indices[k];
            auto begin = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[v]);
            auto end = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[v + 1]);
            auto it = std::lower_bound(begin, end, u);
            if (it == end || *it != u) return false;
            if (values[static_cast<std::size_t>(it - col_indices.begin())] != values[k]) return false;
        }
    }
    return true;
}

DenseMatrix SparseOperator::to_dense() const {
    DenseMatrix m(n, n);
    for (Vertex u = 0; u < n; ++u)
        for (std::size_t k = row_offsets[u]; k < row_offsets[u + 1]; ++k)
            m(u, col_indices[k]) = values[k];
    return m;
}

namespace {

// Builds a symmetric operator with stored diagonal on every row and
// off-diagonal entries on the graph edges:  diag(u) and offdiag(u, v).
template <typename DiagFn, typename OffFn>
SparseOperator with_diagonal(const Graph& g, OperatorKind kind, DiagFn diag, OffFn offdiag) {
    SparseOperator op;
    op.kind = kind;
    op.n = g.num_vertices();
    op.row_offsets.assign(op.n + 1, 0);
    op.col_indices.reserve(2 * g.num_edges() + op.n);
    op.values.reserve(2 * g.num_edges() + op.n);
    for (Vertex u = 0; u < op.n; ++u) {
        bool placed_diag = false;
        for (Vertex v : g.neighbors(u)) {
            if (!placed_diag && v > u) {
                op.col_indices.push_back(u);
                op.values.push_back(diag(u));
                placed_diag = true;
            }
            op.col_indices.push_back(v);
            op.values.push_back(offdiag(u, v));
        }
        if (!placed_diag) {
            op.col_indices.push_back(u);
            op.values.push_back(diag(u));
        }
        op.row_offsets[u + 1] = op.col_indices.size();
    }
    return op;
}

}  // namespace

SparseOperator normalized_laplacian(const Graph& g) {
    std::vector<double> inv_sqrt(g.num_vertices());
    for (Vertex u = 0; u < g.num_vertices(); ++u) {
        const auto d = static_cast<double>(g.degree(u));
        inv_sqrt[u] = d > 0 ? 1.0 / std::sqrt(d) : 0.0;
    }
    return with_diagonal(
        g, OperatorKind::NormalizedLaplacian,
        [&](Vertex u) { return g.degree(u) > 0 ? 1.0 : 0.0; },
        [&](Vertex u, Vertex v) { return -inv_sqrt[u] * inv_sqrt[v]; });
}

SparseOperator augmented_adjacency(const Graph& g) {
    std::vector<double> inv_sqrt(g.num_vertices());
    for (Vertex u = 0; u < g.num_vertices(); ++u)
        inv_sqrt[u] = 1.0 / std::sqrt(static_cast<double>(g.degree(u)) + 1.0);
    return with_diagonal(
        g, OperatorKind::AugmentedAdjacency,
        [&](Vertex u) { return 1.0 / (static_cast<double>(g.degree(u)) + 1.0); },
        [&](Vertex u, Vertex v) { return inv_sqrt[u] * inv_sqrt[v]; });
}

SparseOperator scaled_chebyshev_operator(const Graph& g, double lambda_max) {
    if (!(lambda_max > 0.0)) throw InvalidInput("scaled_chebyshev_operator: lambda_max must be > 0");
    SparseOperator op = normalized_laplacian(g);
    const double scale = 2.0 / lambda_max;
    for (Vertex u = 0; u < op.n; ++u) {
        for (std::size_t k = op.row_offsets[u]; k < op.row_offsets[u + 1]; ++k) {
            op.values[k] *= scale;
            if (op.col_indices[k] == u) op.values[k] -= 1.0;
        }
    }
    op.kind = OperatorKind::ScaledChebyshevBase;
    return op;
}

void spmm_into(const SparseOperator& op, const DenseMatrix& x, DenseMatrix& out) {
    if (x.rows() != op.n) {
        throw InvalidInput("spmm: operator is " + std::to_string(op.n) + "x" +
                           std::to_string(op.n) + ", input is " + shape_string(x));
    }
    const std::size_t h = x.cols();
    if (out.rows() != op.n || out.cols() != h) out = DenseMatrix(op.n, h);
    const double* xs = x.data().data();
    double* os = out.data().data();
    // Column tiles accumulate in registers; per entry the summation order is
    // still ascending in the column index.
    constexpr std::size_t kTile = 8;
    const std::size_t full = h - h % kTile;
    for (std::size_t u = 0; u < op.n; ++u) {
        double* orow = os + u * h;
        const std::size_t begin = op.row_offsets[u];
        const std::size_t end = op.row_offsets[u + 1];
        for (std::size_t j0 = 0; j0 < full; j0 += kTile) {
            double acc[kTile] = {};
            for (std::size_t k = begin; k < end; ++k) {
                const double w = op.values[k];
                const double* xrow = xs + static_cast<std::size_t>(op.col_indices[k]) * h + j0;
                for (std::size_t j = 0; j < kTile; ++j) acc[j] += w * xrow[j];
            }
            for (std::size_t j = 0; j < kTile; ++j) orow[j0 + j] = acc[j];
        }
        for (std::size_t j = full; j < h; ++j) {
            double acc = 0.0;
            for (std::size_t k = begin; k < end; ++k)
                acc += op.values[k] * xs[static_cast<std::size_t>(op.col_indices[k]) * h + j];
            orow[j] = acc;
        }
    }
}

DenseMatrix spmm(const SparseOperator& op, const DenseMatrix& x) {
    DenseMatrix out;
    spmm_into(op, x, out);
    return out;
}

std::vector<double> spmv(const SparseOperator& op, std::span<const double> x) {
    if (x.size() != op.n) throw InvalidInput("spmv: dimension mismatch");
    std::vector<double> y(op.n, 0.0);
    for (std::size_t u = 0; u < op.n; ++u) {
        double s = 0.0;
        for (std::size_t k = op.row_offsets[u]; k < op.row_offsets[u + 1]; ++k)
            s += op.values[k] * x[op.col_indices[k]];
        y[u] = s;
    }
    return y;
}

}  // namespace sgf

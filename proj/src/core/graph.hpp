#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

namespace opinn {

// Static undirected social network. Edges are stored once with u < v,
// deduplicated, no self-loops. Immutable after construction.
class Graph {
public:
    Graph(std::size_t n_nodes, std::vector<std::pair<std::size_t, std::size_t>> edges);

    std::size_t num_nodes() const { return n_nodes_; }
    std::size_t num_edges() const { return edges_.size(); }
    const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }

    std::size_t degree(std::size_t i) const;

    // Sorted, deduplicated neighbors of i, excluding i itself.
    const std::vector<std::size_t>& neighbors(std::size_t i) const;

    bool is_connected() const;

private:
    std::size_t n_nodes_;
    std::vector<std::pair<std::size_t, std::size_t>> edges_;
    std::vector<std::vector<std::size_t>> adjacency_;
};

// Barabasi-Albert preferential attachment. Seed graph is a complete graph on
// m nodes; each subsequent node attaches m edges to distinct existing nodes
// with probability proportional to degree (duplicates resampled), giving
// exactly m*(n-m) + m*(m-1)/2 edges.
Graph generate_ba_graph(std::size_t n, std::size_t m, std::uint64_t seed);

// Sparse symmetric propagation operator: D^{-1/2} (A + I) D^{-1/2} with
// degrees taken after self-loop augmentation. Row weights are nonzero only on
// the diagonal and on graph edges; spectral radius <= 1.
class NormalizedOperator {
public:
    explicit NormalizedOperator(const Graph& g);

    std::size_t num_nodes() const { return rows_.size(); }
    const std::vector<std::pair<std::size_t, double>>& row(std::size_t i) const {
        return rows_[i];
    }

    // y = A_hat * x applied per column of a row-major (n x d) block.
    void apply(const double* x, double* y, std::size_t d) const;

private:
    std::vector<std::vector<std::pair<std::size_t, double>>> rows_;
};

NormalizedOperator propagation_operator(const Graph& g);

// Edge-list CSV with header "u,v", zero-based ids, one undirected edge per row.
void save_graph_csv(const Graph& g, const std::filesystem::path& path);
Graph load_graph_csv(const std::filesystem::path& path);

}  // namespace opinn

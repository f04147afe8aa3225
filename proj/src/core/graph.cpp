#include "core/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <queue>
#include <set>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace opinn {

Graph::Graph(std::size_t n_nodes, std::vector<std::pair<std::size_t, std::size_t>> edges)
    : n_nodes_(n_nodes) {
    std::set<std::pair<std::size_t, std::size_t>> seen;
    edges_.reserve(edges.size());
    for (auto [u, v] : edges) {
        if (u == v) throw InvalidParameterError("graph: self-loop on node " + std::to_string(u));
        if (u >= n_nodes_ || v >= n_nodes_)
            throw InvalidParameterError("graph: edge endpoint out of range");
        if (u > v) std::swap(u, v);
        if (seen.insert({u, v}).second) edges_.emplace_back(u, v);
    }
    adjacency_.resize(n_nodes_);
    for (auto [u, v] : edges_) {
        adjacency_[u].push_back(v);
        adjacency_[v].push_back(u);
    }
    for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

std::size_t Graph::degree(std::size_t i) const {
    if (i >= n_nodes_) throw InvalidParameterError("graph: node index out of range");
    return adjacency_[i].size();
}

const std::vector<std::size_t>& Graph::neighbors(std::size_t i) const {
    if (i >= n_nodes_) throw InvalidParameterError("graph: node index out of range");
    return adjacency_[i];
}

bool Graph::is_connected() const {
    if (n_nodes_ == 0) return true;
    std::vector<char> seen(n_nodes_, 0);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = 1;
    std::size_t count = 1;
    while (!q.empty()) {
        std::size_t u = q.front();
        q.pop();
        for (std::size_t v : adjacency_[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                q.push(v);
            }
        }
    }
    return count == n_nodes_;
}

Graph generate_ba_graph(std::size_t n, std::size_t m, std::uint64_t seed) {
    if (m < 1 || n <= m)
        throw InvalidParameterError("generate_ba_graph: requires n > m >= 1");

    auto rng = make_stream(seed, "graph");
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    edges.reserve(m * (n - m) + m * (m - 1) / 2);

    // repeats[k] lists node ids once per incident edge, so uniform sampling
    // from it is degree-proportional.
    std::vector<std::size_t> repeats;
    repeats.reserve(2 * (m * (n - m) + m * (m - 1) / 2));

    for (std::size_t u = 0; u < m; ++u) {
        for (std::size_t v = u + 1; v < m; ++v) {
            edges.emplace_back(u, v);
            repeats.push_back(u);
            repeats.push_back(v);
        }
    }
    if (m == 1) repeats.push_back(0);  // lone seed node has degree 0

    std::vector<std::size_t> targets;
    for (std::size_t node = m; node < n; ++node) {
        targets.clear();
        while (targets.size() < m) {
            std::uniform_int_distribution<std::size_t> pick(0, repeats.size() - 1);
            std::size_t candidate = repeats[pick(rng)];
            if (std::find(targets.begin(), targets.end(), candidate) == targets.end())
                targets.push_back(candidate);
        }
        for (std::size_t t : targets) {
            edges.emplace_back(t, node);
            repeats.push_back(t);
            repeats.push_back(node);
        }
    }
    return Graph(n, std::move(edges));
}

NormalizedOperator::NormalizedOperator(const Graph& g) {
    std::size_t n = g.num_nodes();
    rows_.resize(n);
    std::vector<double> inv_sqrt(n);
    for (std::size_t i = 0; i < n; ++i)
        inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));
    for (std::size_t i = 0; i < n; ++i) {
        auto& row = rows_[i];
        const auto& nbrs = g.neighbors(i);
        row.reserve(nbrs.size() + 1);
        bool placed_diag = false;
        for (std::size_t j : nbrs) {
            if (!placed_diag && j > i) {
                row.emplace_back(i, inv_sqrt[i] * inv_sqrt[i]);
                placed_diag = true;
            }
            row.emplace_back(j, inv_sqrt[i] * inv_sqrt[j]);
        }
        if (!placed_diag) row.emplace_back(i, inv_sqrt[i] * inv_sqrt[i]);
    }
}

void NormalizedOperator::apply(const double* x, double* y, std::size_t d) const {
    std::size_t n = rows_.size();
    std::fill(y, y + n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double* yi = y + i * d;
        for (auto [j, w] : rows_[i]) {
            const double* xj = x + j * d;
            for (std::size_t k = 0; k < d; ++k) yi[k] += w * xj[k];
        }
    }
}

NormalizedOperator propagation_operator(const Graph& g) { return NormalizedOperator(g); }

void save_graph_csv(const Graph& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << "u,v\n";
    for (auto [u, v] : g.edges()) out << u << ',' << v << '\n';
    if (!out) throw DataError("write failed: " + path.string());
}

Graph load_graph_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ":1: empty file");
    if (line == "u,v\r") line = "u,v";
    if (line != "u,v")
        throw DataError(path.string() + ":1: expected header 'u,v', got '" + line + "'");

    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::size_t max_id = 0;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 'u,v'");
        std::size_t u = 0, v = 0;
        auto r1 = std::from_chars(line.data(), line.data() + comma, u);
        auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), v);
        if (r1.ec != std::errc{} || r2.ec != std::errc{} ||
            r1.ptr != line.data() + comma || r2.ptr != line.data() + line.size())
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad edge '" + line + "'");
        edges.emplace_back(u, v);
        max_id = std::max({max_id, u, v});
    }
    std::size_t n = edges.empty() ? 0 : max_id + 1;
    return Graph(n, std::move(edges));
}

}  // namespace opinn

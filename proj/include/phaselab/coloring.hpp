#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phaselab/csp.hpp"
#include "phaselab/random.hpp"
#include "phaselab/solvers.hpp"

namespace phaselab {

/// Simple undirected graph. Edges are stored as (u, v) with u < v, sorted.
class Graph {
public:
    using Edge = std::pair<int, int>;

    Graph() = default;
    /// Canonicalizes and sorts the edges. Throws InputError on self-loops,
    /// duplicates, endpoints out of range or node_count < 1.
    Graph(int node_count, std::vector<Edge> edges);

    int node_count() const { return node_count_; }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    /// 2|E| / |V|.
    double gamma() const;
    std::vector<std::vector<int>> adjacency() const;

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    int node_count_ = 0;
    std::vector<Edge> edges_;
};

bool is_connected(const Graph& graph);
/// colors[v] in [0, 3) for every node and no edge joins equal colors.
bool is_proper_coloring(const Graph& graph, std::span<const int> colors, int palette = 3);

/// G(n, M) graph with M = gamma * node_count / 2 edges, drawn uniformly
/// without replacement. M must be an integer no larger than C(n, 2).
Graph random_graph(int node_count, double gamma, Rng& rng);

/// One nogood (u, c, v, c) per edge and color.
Problem coloring_to_csp(const Graph& graph, int colors = 3);

inline constexpr std::uint64_t kDefaultColoringNodeCap = 10'000'000;

struct ColoringOutcome {
    SearchStatus status = SearchStatus::unsolvable;
    std::vector<int> colors;  ///< -1 for uncolored nodes
    std::uint64_t nodes = 0;
    std::uint64_t seed = 0;
};

/// Snapshot passed to the trace callback each time a node is selected.
struct BrelazStep {
    int depth = 0;
    int node = 0;
    std::span<const int> colors;  ///< current coloring before `node` is colored
};

using BrelazTrace = std::function<void(const BrelazStep&)>;

/// Chronological backtracking 3-coloring. The next node has the most
/// distinct neighbor colors, then the most uncolored neighbors, remaining
/// ties broken at random. Colors are tried in the order 0, 1, 2, and each
/// legal color assignment is one node. The first two nodes colored keep
/// their first color: backtracking into them ends the search as unsolvable.
ColoringOutcome brelaz_backtrack(const Graph& graph, std::uint64_t seed,
                                 SearchLimits limits = {kDefaultColoringNodeCap},
                                 const BrelazTrace* trace = nullptr);

// Graph file format:
//   graph <node_count> <edge_count>
//   <u> <v>                             (edge_count lines, u < v, sorted)
void write_graph(std::ostream& out, const Graph& graph);
Graph read_graph(std::istream& in);
void save_graph(const std::string& path, const Graph& graph);
Graph load_graph(const std::string& path);

} // namespace phaselab

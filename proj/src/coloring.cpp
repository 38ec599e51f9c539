#include "phaselab/coloring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "phaselab/error.hpp"

namespace phaselab {

Graph::Graph(int node_count, std::vector<Edge> edges) : node_count_(node_count), edges_(std::move(edges))
{
    if (node_count < 1)
        throw InputError("graph needs at least one node");
    for (auto& [u, v] : edges_) {
        if (u < 0 || v < 0 || u >= node_count || v >= node_count)
            throw InputError("edge endpoint out of range");
        if (u == v)
            throw InputError("self-loop on node " + std::to_string(u));
        if (u > v)
            std::swap(u, v);
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
        throw InputError("duplicate edge");
}

double Graph::gamma() const
{
    return 2.0 * static_cast<double>(edges_.size()) / static_cast<double>(node_count_);
}

std::vector<std::vector<int>> Graph::adjacency() const
{
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(node_count_));
    for (const auto& [u, v] : edges_) {
        adj[static_cast<std::size_t>(u)].push_back(v);
        adj[static_cast<std::size_t>(v)].push_back(u);
    }
    return adj;
}

bool is_connected(const Graph& graph)
{
    const auto adj = graph.adjacency();
    std::vector<char> seen(adj.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int w : adj[static_cast<std::size_t>(u)]) {
            if (!seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = 1;
                ++reached;
                stack.push_back(w);
            }
        }
    }
    return reached == adj.size();
}

bool is_proper_coloring(const Graph& graph, std::span<const int> colors, int palette)
{
    if (colors.size() != static_cast<std::size_t>(graph.node_count()))
        return false;
    for (int c : colors)
        if (c < 0 || c >= palette)
            return false;
    for (const auto& [u, v] : graph.edges())
        if (colors[static_cast<std::size_t>(u)] == colors[static_cast<std::size_t>(v)])
            return false;
    return true;
}

Graph random_graph(int node_count, double gamma, Rng& rng)
{
    if (node_count < 1)
        throw InputError("graph needs at least one node");
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
        throw InputError("connectivity must be a non-negative number");
    const double exact = gamma * node_count / 2.0;
    const double rounded = std::round(exact);
    if (std::abs(exact - rounded) > 1e-9 * std::max(1.0, exact))
        throw InputError("gamma * node_count / 2 is not an integer");
    const auto pairs = static_cast<std::uint64_t>(node_count) * static_cast<std::uint64_t>(node_count - 1) / 2;
    if (rounded > static_cast<double>(pairs))
        throw InputError("more edges requested than node pairs exist");
    const auto m = static_cast<std::size_t>(rounded);

    std::vector<Graph::Edge> all;
    all.reserve(pairs);
    for (int u = 0; u < node_count; ++u)
        for (int v = u + 1; v < node_count; ++v)
            all.emplace_back(u, v);
    rng.partial_shuffle(std::span<Graph::Edge>(all), m);
    all.resize(m);
    return Graph(node_count, std::move(all));
}

Problem coloring_to_csp(const Graph& graph, int colors)
{
    if (colors < 1)
        throw InputError("need at least one color");
    std::vector<Nogood> nogoods;
    nogoods.reserve(graph.edge_count() * static_cast<std::size_t>(colors));
    for (const auto& [u, v] : graph.edges())
        for (int c = 0; c < colors; ++c)
            nogoods.push_back({u, c, v, c});
    return Problem(graph.node_count(), colors, std::move(nogoods));
}

namespace {

constexpr int kPalette = 3;

class BrelazSearch {
public:
    BrelazSearch(const Graph& graph, std::uint64_t seed, SearchLimits limits, const BrelazTrace* trace)
        : n_(graph.node_count()), adj_(graph.adjacency()), rng_(seed), limits_(limits), trace_(trace),
          colors_(static_cast<std::size_t>(n_), -1), seen_(static_cast<std::size_t>(n_) * kPalette, 0),
          uncolored_(static_cast<std::size_t>(n_)), chosen_(static_cast<std::size_t>(n_)),
          next_(static_cast<std::size_t>(n_), 0)
    {
        for (int v = 0; v < n_; ++v)
            uncolored_[static_cast<std::size_t>(v)] = static_cast<int>(adj_[static_cast<std::size_t>(v)].size());
    }

    ColoringOutcome run(std::uint64_t seed)
    {
        ColoringOutcome out;
        out.seed = seed;
        out.status = search();
        out.nodes = nodes_;
        out.colors = colors_;
        return out;
    }

private:
    int saturation(int v) const
    {
        int s = 0;
        for (int c = 0; c < kPalette; ++c)
            s += seen_[static_cast<std::size_t>(v) * kPalette + c] > 0 ? 1 : 0;
        return s;
    }

    int select(int depth)
    {
        int best_sat = -1;
        int best_free = -1;
        ties_.clear();
        for (int v = 0; v < n_; ++v) {
            if (colors_[static_cast<std::size_t>(v)] >= 0)
                continue;
            const int sat = saturation(v);
            const int free = uncolored_[static_cast<std::size_t>(v)];
            if (sat > best_sat || (sat == best_sat && free > best_free)) {
                best_sat = sat;
                best_free = free;
                ties_.clear();
            }
            if (sat == best_sat && free == best_free)
                ties_.push_back(v);
        }
        const int v = ties_.size() == 1 ? ties_[0] : ties_[static_cast<std::size_t>(rng_.below(static_cast<int>(ties_.size())))];
        if (trace_)
            (*trace_)(BrelazStep{depth, v, colors_});
        return v;
    }

    void paint(int v, int c, int delta)
    {
        for (int w : adj_[static_cast<std::size_t>(v)]) {
            seen_[static_cast<std::size_t>(w) * kPalette + c] += delta;
            uncolored_[static_cast<std::size_t>(w)] -= delta;
        }
        colors_[static_cast<std::size_t>(v)] = delta > 0 ? c : -1;
    }

    SearchStatus search()
    {
        int depth = 0;
        chosen_[0] = select(0);
        for (;;) {
            const int v = chosen_[static_cast<std::size_t>(depth)];
            const int old = colors_[static_cast<std::size_t>(v)];
            if (old >= 0)
                paint(v, old, -1);

            int c = next_[static_cast<std::size_t>(depth)];
            while (c < kPalette && seen_[static_cast<std::size_t>(v) * kPalette + c] > 0)
                ++c;
            if (c == kPalette) {
                // The first two colors are never revised: any solution can
                // be recolored to agree with them.
                if (depth <= 1)
                    return SearchStatus::unsolvable;
                --depth;
                continue;
            }
            if (limits_.node_cap != 0 && nodes_ >= limits_.node_cap)
                return SearchStatus::censored;
            ++nodes_;
            paint(v, c, +1);
            next_[static_cast<std::size_t>(depth)] = depth <= 1 ? kPalette : c + 1;

            if (++depth == n_)
                return SearchStatus::solution;
            chosen_[static_cast<std::size_t>(depth)] = select(depth);
            next_[static_cast<std::size_t>(depth)] = 0;
        }
    }

    int n_;
    std::vector<std::vector<int>> adj_;
    Rng rng_;
    SearchLimits limits_;
    const BrelazTrace* trace_;
    std::vector<int> colors_;
    std::vector<int> seen_;       ///< colored neighbors per (node, color)
    std::vector<int> uncolored_;  ///< uncolored neighbors per node
    std::vector<int> chosen_;
    std::vector<int> next_;
    std::vector<int> ties_;
    std::uint64_t nodes_ = 0;
};

} // namespace

ColoringOutcome brelaz_backtrack(const Graph& graph, std::uint64_t seed, SearchLimits limits, const BrelazTrace* trace)
{
    if (graph.node_count() < 1)
        throw InputError("graph needs at least one node");
    BrelazSearch search(graph, seed, limits, trace);
    return search.run(seed);
}

void write_graph(std::ostream& out, const Graph& graph)
{
    out << "graph " << graph.node_count() << ' ' << graph.edge_count() << '\n';
    for (const auto& [u, v] : graph.edges())
        out << u << ' ' << v << '\n';
}

Graph read_graph(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw InputError("empty graph file");
    std::istringstream header(line);
    std::string tag;
    long long n = 0;
    long long e = 0;
    std::string trailing;
    if (!(header >> tag >> n >> e) || tag != "graph" || (header >> trailing))
        throw InputError("expected header 'graph <node_count> <edge_count>'");
    if (n < 1 || n > 1'000'000 || e < 0 || e > n * (n - 1) / 2)
        throw InputError("header values out of range");

    std::vector<Graph::Edge> edges;
    edges.reserve(static_cast<std::size_t>(e));
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream row(line);
        Graph::Edge edge;
        if (!(row >> edge.first >> edge.second) || (row >> trailing))
            throw InputError("malformed edge line: '" + line + "'");
        if (edge.first >= edge.second)
            throw InputError("edge not in canonical order: '" + line + "'");
        if (!edges.empty() && !(edges.back() < edge))
            throw InputError("edges not sorted or duplicated: '" + line + "'");
        edges.push_back(edge);
    }
    if (static_cast<long long>(edges.size()) != e)
        throw InputError("header declares " + std::to_string(e) + " edges, found " + std::to_string(edges.size()));
    return Graph(static_cast<int>(n), std::move(edges));
}

void save_graph(const std::string& path, const Graph& graph)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open for writing", path);
    write_graph(out, graph);
    if (!out)
        throw IoError("write failed", path);
}

Graph load_graph(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open for reading", path);
    return read_graph(in);
}

} // namespace phaselab

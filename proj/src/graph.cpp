#include "opdyn/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "opdyn/errors.hpp"
#include "opdyn/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace opdyn::graph {

namespace {

bool contains(const std::vector<std::uint32_t>& list, std::uint32_t v) {
    return std::find(list.begin(), list.end(), v) != list.end();
}

Graph build_csr(std::uint32_t n, std::vector<std::vector<std::uint32_t>>& adj) {
    Graph g;
    g.n_nodes = n;
    g.row_offsets.resize(n + 1);
    g.row_offsets[0] = 0;
    std::uint64_t total = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
        std::sort(adj[i].begin(), adj[i].end());
        total += adj[i].size();
        g.row_offsets[i + 1] = total;
    }
    g.neighbor_ids.reserve(total);
    for (std::uint32_t i = 0; i < n; ++i)
        g.neighbor_ids.insert(g.neighbor_ids.end(), adj[i].begin(), adj[i].end());
    return g;
}

// Sum of BFS distances from source to every reachable node; also reports how
// many nodes were reached. Scratch buffers are reused across calls.
std::uint64_t bfs_distance_sum(const Graph& g, std::uint32_t source,
                               std::vector<std::uint32_t>& dist,
                               std::vector<std::uint32_t>& queue,
                               std::size_t& n_reached) {
    constexpr std::uint32_t kUnvisited = ~std::uint32_t{0};
    dist.assign(g.n_nodes, kUnvisited);
    queue.clear();
    queue.push_back(source);
    dist[source] = 0;
    std::uint64_t sum = 0;
    std::size_t head = 0;
    while (head < queue.size()) {
        const std::uint32_t u = queue[head++];
        const std::uint32_t du = dist[u];
        for (std::uint32_t v : g.neighbors(u)) {
            if (dist[v] == kUnvisited) {
                dist[v] = du + 1;
                sum += du + 1;
                queue.push_back(v);
            }
        }
    }
    n_reached = queue.size();
    return sum;
}

void require_connected(const Graph& g) {
    const std::size_t components = count_components(g);
    if (components != 1) {
        throw DisconnectedGraphError(
            "graph is disconnected (" + std::to_string(components) + " components)", components);
    }
}

// Mean distance over the given BFS sources; integer accumulation keeps the
// result independent of how sources are split across threads.
double mean_distance_from_sources(const Graph& g, const std::vector<std::uint32_t>& sources) {
    std::uint64_t total = 0;
#ifdef _OPENMP
#pragma omp parallel
#endif
    {
        std::vector<std::uint32_t> dist, queue;
        queue.reserve(g.n_nodes);
#ifdef _OPENMP
#pragma omp for schedule(dynamic, 8) reduction(+ : total)
#endif
        for (std::int64_t s = 0; s < static_cast<std::int64_t>(sources.size()); ++s) {
            std::size_t reached = 0;
            total += bfs_distance_sum(g, sources[s], dist, queue, reached);
        }
    }
    const double pairs =
        static_cast<double>(sources.size()) * static_cast<double>(g.n_nodes - 1);
    return static_cast<double>(total) / pairs;
}

} // namespace

Graph generate_watts_strogatz(const WattsStrogatzParams& params) {
    const std::uint32_t n = params.n_nodes;
    const std::uint32_t k = params.k_ring;
    if (n <= 2) throw InputError("watts-strogatz: n_nodes must exceed 2");
    if (k < 2 || k % 2 != 0) throw InputError("watts-strogatz: k_ring must be even and >= 2");
    if (k >= n) throw InputError("watts-strogatz: k_ring must be smaller than n_nodes");
    if (!(params.p_rewire >= 0.0 && params.p_rewire <= 1.0))
        throw InputError("watts-strogatz: p_rewire must lie in [0, 1]");

    std::vector<std::vector<std::uint32_t>> adj(n);
    for (auto& list : adj) list.reserve(k + 2);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t d = 1; d <= k / 2; ++d) {
            const std::uint32_t j = (i + d) % n;
            adj[i].push_back(j);
            adj[j].push_back(i);
        }
    }

    // Rewiring pass: nodes in ascending order, each node's clockwise edges in
    // distance order; only the far endpoint moves.
    Rng rng(params.seed);
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t d = 1; d <= k / 2; ++d) {
            if (!rng.next_bernoulli(params.p_rewire)) continue;
            const std::uint32_t old = (i + d) % n;
            for (int attempt = 0; attempt < 100; ++attempt) {
                const auto u = static_cast<std::uint32_t>(rng.next_below(n));
                if (u == i || contains(adj[i], u)) continue;
                adj[i].erase(std::find(adj[i].begin(), adj[i].end(), old));
                adj[old].erase(std::find(adj[old].begin(), adj[old].end(), i));
                adj[i].push_back(u);
                adj[u].push_back(i);
                break;
            }
        }
    }
    return build_csr(n, adj);
}

Graph from_edges(std::uint32_t n_nodes,
                 const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges) {
    std::vector<std::vector<std::uint32_t>> adj(n_nodes);
    for (const auto& [a, b] : edges) {
        if (a >= n_nodes || b >= n_nodes) throw InputError("edge endpoint out of range");
        if (a == b) throw InputError("self-loop in edge list");
        if (contains(adj[a], b)) throw InputError("duplicate edge in edge list");
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    return build_csr(n_nodes, adj);
}

void validate(const Graph& g) {
    if (g.row_offsets.size() != static_cast<std::size_t>(g.n_nodes) + 1 ||
        g.row_offsets.front() != 0 || g.row_offsets.back() != g.neighbor_ids.size())
        throw InputError("graph: malformed row offsets");
    for (std::uint32_t i = 0; i < g.n_nodes; ++i) {
        if (g.row_offsets[i] > g.row_offsets[i + 1])
            throw InputError("graph: row offsets not nondecreasing");
        auto nbrs = g.neighbors(i);
        for (std::size_t t = 0; t < nbrs.size(); ++t) {
            const std::uint32_t j = nbrs[t];
            if (j >= g.n_nodes) throw InputError("graph: neighbor id out of range");
            if (j == i) throw InputError("graph: self-loop");
            if (t > 0 && nbrs[t - 1] >= j)
                throw InputError("graph: neighbor list not strictly ascending");
            auto back = g.neighbors(j);
            if (!std::binary_search(back.begin(), back.end(), i))
                throw InputError("graph: adjacency not symmetric");
        }
    }
}

std::size_t count_components(const Graph& g) {
    constexpr std::uint32_t kUnvisited = ~std::uint32_t{0};
    std::vector<std::uint32_t> comp(g.n_nodes, kUnvisited);
    std::vector<std::uint32_t> stack;
    std::size_t n_components = 0;
    for (std::uint32_t s = 0; s < g.n_nodes; ++s) {
        if (comp[s] != kUnvisited) continue;
        ++n_components;
        comp[s] = static_cast<std::uint32_t>(n_components);
        stack.push_back(s);
        while (!stack.empty()) {
            const std::uint32_t u = stack.back();
            stack.pop_back();
            for (std::uint32_t v : g.neighbors(u)) {
                if (comp[v] == kUnvisited) {
                    comp[v] = static_cast<std::uint32_t>(n_components);
                    stack.push_back(v);
                }
            }
        }
    }
    return n_components;
}

double exact_average_path_length(const Graph& g) {
    if (g.n_nodes < 2) throw InputError("average path length needs at least 2 nodes");
    if (g.n_nodes > 20000)
        throw InputError("exact average path length is guarded to n_nodes <= 20000");
    require_connected(g);
    std::vector<std::uint32_t> all(g.n_nodes);
    for (std::uint32_t i = 0; i < g.n_nodes; ++i) all[i] = i;
    return mean_distance_from_sources(g, all);
}

double sampled_average_path_length(const Graph& g, std::uint32_t n_sources, std::uint64_t seed) {
    if (g.n_nodes < 2) throw InputError("average path length needs at least 2 nodes");
    if (n_sources < 1 || n_sources > g.n_nodes)
        throw InputError("n_sources must lie in [1, n_nodes]");
    require_connected(g);
    const auto picks = sample_distinct(g.n_nodes, n_sources, seed);
    std::vector<std::uint32_t> sources(picks.begin(), picks.end());
    return mean_distance_from_sources(g, sources);
}

void save_edge_list(const Graph& g, std::ostream& out) {
    out << g.n_nodes << ' ' << g.n_edges() << '\n';
    for (std::uint32_t i = 0; i < g.n_nodes; ++i)
        for (std::uint32_t j : g.neighbors(i))
            if (i < j) out << i << ' ' << j << '\n';
}

Graph load_edge_list(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InputError("edge list: missing header line");
    std::uint64_t n = 0, m = 0;
    {
        std::istringstream header(line);
        if (!(header >> n >> m)) throw InputError("edge list: malformed header line");
    }
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    edges.reserve(m);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::uint64_t a = 0, b = 0;
        if (!(row >> a >> b))
            throw InputError("edge list: malformed edge at line " + std::to_string(line_no));
        if (a >= b)
            throw InputError("edge list: edges must satisfy i < j at line " + std::to_string(line_no));
        edges.emplace_back(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
    }
    if (edges.size() != m)
        throw InputError("edge list: header announces " + std::to_string(m) + " edges, found " +
                         std::to_string(edges.size()));
    return from_edges(static_cast<std::uint32_t>(n), edges);
}

} // namespace opdyn::graph

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace opdyn::graph {

struct WattsStrogatzParams {
    std::uint32_t n_nodes = 0;
    std::uint32_t k_ring = 0;   // even; each node starts with k_ring/2 ring neighbors per side
    double p_rewire = 0.0;      // in [0, 1]
    std::uint64_t seed = 0;
};

/// Undirected sparse graph in compressed row form. Neighbor lists are kept in
/// ascending node order; adjacency is symmetric, with no self-loops and no
/// duplicate edges.
struct Graph {
    std::uint32_t n_nodes = 0;
    std::vector<std::uint64_t> row_offsets; // n_nodes + 1, nondecreasing
    std::vector<std::uint32_t> neighbor_ids;

    std::span<const std::uint32_t> neighbors(std::uint32_t i) const {
        return {neighbor_ids.data() + row_offsets[i],
                neighbor_ids.data() + row_offsets[i + 1]};
    }
    std::uint64_t degree(std::uint32_t i) const { return row_offsets[i + 1] - row_offsets[i]; }
    std::uint64_t n_edges() const { return neighbor_ids.size() / 2; }
};

/// Ring lattice on n_nodes with k_ring/2 clockwise links per node, then each
/// clockwise edge rewired with probability p_rewire to a uniformly drawn
/// endpoint (rejecting self-loops and duplicates, up to 100 redraws, keeping
/// the original edge after that). Node and edge iteration order is fixed, so
/// identical params give a bit-identical graph.
Graph generate_watts_strogatz(const WattsStrogatzParams& params);

/// Build from an explicit undirected edge list. Validates: indices in range,
/// no self-loops, no duplicates.
Graph from_edges(std::uint32_t n_nodes,
                 const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges);

/// Full-scan check of the structural invariants (symmetry, sortedness,
/// no self-loops/duplicates). Throws InputError on violation.
void validate(const Graph& g);

std::size_t count_components(const Graph& g);

/// Mean shortest-path distance over all unordered node pairs, by all-pairs
/// BFS. Guarded to n_nodes <= 20000; throws DisconnectedGraphError on
/// disconnected input.
double exact_average_path_length(const Graph& g);

/// Mean distance from n_sources uniformly sampled distinct sources to all
/// other nodes. Equals the exact value when n_sources == n_nodes. BFS fans
/// out across sources; the distance accumulator is integral, so the result
/// does not depend on the worker count.
double sampled_average_path_length(const Graph& g, std::uint32_t n_sources, std::uint64_t seed);

/// Plain-text edge list: header "n_nodes m_edges", then one "i j" line per
/// edge with i < j.
void save_edge_list(const Graph& g, std::ostream& out);
Graph load_edge_list(std::istream& in);

} // namespace opdyn::graph

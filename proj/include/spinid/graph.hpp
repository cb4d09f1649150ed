#pragma once

#include <string>
#include <vector>

#include "spinid/error.hpp"

namespace spinid {

// Undirected simple graph on nodes 0..node_count-1. Edges are stored in
// canonical form (m < n) and sorted; adjacency lists are kept sorted so all
// traversals are deterministic. Nodes are 0-based everywhere in the library;
// the file formats and reports use 1-based ids.
class GraphTopology {
public:
    GraphTopology() = default;
    GraphTopology(int node_count, std::vector<std::pair<int, int>> edges);

    int node_count() const { return n_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

    // Nodes sharing an edge with m, ascending.
    const std::vector<int>& neighbors(int m) const;

    bool has_edge(int m, int n) const;

    // Index of the canonical edge (min,max) in edges(), or -1.
    int edge_index(int m, int n) const;

    bool connected() const;

private:
    int n_ = 0;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> adj_;
};

// Nonempty subset of nodes the experimenter can prepare, control and measure.
struct GatewaySet {
    std::vector<int> members;  // sorted, unique

    // Validates members against the topology and returns the canonical set.
    static GatewaySet checked(std::vector<int> members, const GraphTopology& g);

    bool contains(int n) const;
    std::vector<int> complement(const GraphTopology& g) const;
};

// One application of the propagation rule: `infector` had `forced` as its
// unique healthy neighbor at the time the step fired.
struct ForcingStep {
    int infector = -1;
    int forced = -1;
};

struct ForcingSequence {
    std::vector<ForcingStep> steps;
};

struct ForcingOutcome {
    bool infecting = false;
    ForcingSequence sequence;   // complete iff infecting
    std::vector<int> closure;   // maximal infected set reached, ascending
};

// Replays the infection rule from `gateway` to a fixpoint. Deterministic:
// at each round the lowest-index eligible infector fires (its forced node is
// unique by the rule). The closure itself is order-independent, so whether
// the gateway infects the whole graph does not depend on the tie-breaking.
ForcingOutcome forcing_sequence(const GraphTopology& g, const GatewaySet& gateway);

// Fixpoint of the propagation rule started from an arbitrary seed set.
// Idempotent and monotone in the seed.
std::vector<int> infected_closure(const GraphTopology& g, const std::vector<int>& seed);

struct MinInfectingResult {
    bool found = false;
    GatewaySet gateway;  // smallest infecting set, lexicographically first
};

// Exhaustive search over subsets by (cardinality, lexicographic) order.
// Intended as a testing aid on small graphs; throws "cap_exceeded" when
// node_count > brute_force_cap.
MinInfectingResult min_infecting_set(const GraphTopology& g, int size_limit,
                                     int brute_force_cap = 16);

enum class LatticeKind { chain, grid2d, grid3d, cycle };

LatticeKind lattice_kind_from_string(const std::string& s);
std::string to_string(LatticeKind kind);

// Nearest-neighbor lattice generators. Node ordering is row-major with the
// first dimension fastest: chain/cycle index nodes 0..L-1 along the line;
// grid2d {nx,ny} uses id = x + nx*y; grid3d {nx,ny,nz} uses
// id = x + nx*(y + ny*z).
GraphTopology standard_topology(LatticeKind kind, const std::vector<int>& dims);

}  // namespace spinid

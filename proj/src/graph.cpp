#include "spinid/graph.hpp"

#include <algorithm>
#include <numeric>

namespace spinid {

GraphTopology::GraphTopology(int node_count, std::vector<std::pair<int, int>> edges)
    : n_(node_count) {
    if (node_count <= 0)
        throw Error("invalid_network", "node_count must be positive");
    edges_.reserve(edges.size());
    for (auto [m, n] : edges) {
        if (m == n)
            throw Error("invalid_network",
                        "self-loop at node " + std::to_string(m));
        if (m < 0 || n < 0 || m >= n_ || n >= n_)
            throw Error("invalid_network",
                        "edge (" + std::to_string(m) + "," + std::to_string(n) +
                            ") out of range for " + std::to_string(n_) + " nodes");
        if (m > n) std::swap(m, n);
        edges_.emplace_back(m, n);
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
        throw Error("invalid_network", "duplicate edge");

    adj_.assign(n_, {});
    for (auto [m, n] : edges_) {
        adj_[m].push_back(n);
        adj_[n].push_back(m);
    }
    for (auto& a : adj_) std::sort(a.begin(), a.end());
}

const std::vector<int>& GraphTopology::neighbors(int m) const {
    if (m < 0 || m >= n_)
        throw Error("invalid_network", "node index out of range");
    return adj_[m];
}

bool GraphTopology::has_edge(int m, int n) const { return edge_index(m, n) >= 0; }

int GraphTopology::edge_index(int m, int n) const {
    if (m == n) return -1;
    if (m > n) std::swap(m, n);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), std::make_pair(m, n));
    if (it != edges_.end() && *it == std::make_pair(m, n))
        return static_cast<int>(it - edges_.begin());
    return -1;
}

bool GraphTopology::connected() const {
    std::vector<char> seen(n_, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : adj_[v]) {
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                stack.push_back(w);
            }
        }
    }
    return count == n_;
}

GatewaySet GatewaySet::checked(std::vector<int> members, const GraphTopology& g) {
    if (members.empty())
        throw Error("invalid_network", "gateway must be nonempty");
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    for (int m : members) {
        if (m < 0 || m >= g.node_count())
            throw Error("invalid_network",
                        "gateway node " + std::to_string(m) + " out of range");
    }
    return GatewaySet{std::move(members)};
}

bool GatewaySet::contains(int n) const {
    return std::binary_search(members.begin(), members.end(), n);
}

std::vector<int> GatewaySet::complement(const GraphTopology& g) const {
    std::vector<int> out;
    out.reserve(g.node_count() - members.size());
    for (int v = 0; v < g.node_count(); ++v)
        if (!contains(v)) out.push_back(v);
    return out;
}

namespace {

// Core propagation loop shared by forcing_sequence and infected_closure.
// Each round fires the lowest-index infected node with exactly one healthy
// neighbor; returns the steps taken in order.
std::vector<ForcingStep> propagate(const GraphTopology& g, std::vector<char>& infected) {
    const int n = g.node_count();
    std::vector<ForcingStep> steps;
    bool progress = true;
    while (progress) {
        progress = false;
        for (int v = 0; v < n && !progress; ++v) {
            if (!infected[v]) continue;
            int healthy = -1;
            int healthy_count = 0;
            for (int w : g.neighbors(v)) {
                if (!infected[w]) {
                    healthy = w;
                    if (++healthy_count > 1) break;
                }
            }
            if (healthy_count == 1) {
                infected[healthy] = 1;
                steps.push_back({v, healthy});
                progress = true;
            }
        }
    }
    return steps;
}

std::vector<int> collect(const std::vector<char>& infected) {
    std::vector<int> out;
    for (int v = 0; v < static_cast<int>(infected.size()); ++v)
        if (infected[v]) out.push_back(v);
    return out;
}

}  // namespace

ForcingOutcome forcing_sequence(const GraphTopology& g, const GatewaySet& gateway) {
    GatewaySet checked = GatewaySet::checked(gateway.members, g);
    std::vector<char> infected(g.node_count(), 0);
    for (int m : checked.members) infected[m] = 1;

    std::vector<ForcingStep> steps = propagate(g, infected);

    ForcingOutcome out;
    out.closure = collect(infected);
    out.infecting = static_cast<int>(out.closure.size()) == g.node_count();
    if (out.infecting) out.sequence.steps = std::move(steps);
    return out;
}

std::vector<int> infected_closure(const GraphTopology& g, const std::vector<int>& seed) {
    std::vector<char> infected(g.node_count(), 0);
    for (int m : seed) {
        if (m < 0 || m >= g.node_count())
            throw Error("invalid_network", "seed node out of range");
        infected[m] = 1;
    }
    propagate(g, infected);
    return collect(infected);
}

MinInfectingResult min_infecting_set(const GraphTopology& g, int size_limit,
                                     int brute_force_cap) {
    const int n = g.node_count();
    if (n > brute_force_cap)
        throw Error("cap_exceeded",
                    "min_infecting_set is exhaustive; node_count " + std::to_string(n) +
                        " exceeds cap " + std::to_string(brute_force_cap));

    const int max_k = std::min(size_limit, n);
    for (int k = 1; k <= max_k; ++k) {
        // Lexicographically ordered k-combinations of 0..n-1.
        std::vector<int> comb(k);
        std::iota(comb.begin(), comb.end(), 0);
        while (true) {
            std::vector<char> infected(n, 0);
            for (int m : comb) infected[m] = 1;
            propagate(g, infected);
            if (std::count(infected.begin(), infected.end(), char(1)) == n) {
                MinInfectingResult res;
                res.found = true;
                res.gateway.members = comb;
                return res;
            }
            int i = k - 1;
            while (i >= 0 && comb[i] == n - k + i) --i;
            if (i < 0) break;
            ++comb[i];
            for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
        }
    }
    return {};
}

LatticeKind lattice_kind_from_string(const std::string& s) {
    if (s == "chain") return LatticeKind::chain;
    if (s == "grid2d") return LatticeKind::grid2d;
    if (s == "grid3d") return LatticeKind::grid3d;
    if (s == "cycle") return LatticeKind::cycle;
    throw Error("bad_dims", "unknown lattice kind '" + s + "'");
}

std::string to_string(LatticeKind kind) {
    switch (kind) {
        case LatticeKind::chain: return "chain";
        case LatticeKind::grid2d: return "grid2d";
        case LatticeKind::grid3d: return "grid3d";
        case LatticeKind::cycle: return "cycle";
    }
    return "?";
}

GraphTopology standard_topology(LatticeKind kind, const std::vector<int>& dims) {
    auto need = [&](size_t count) {
        if (dims.size() != count)
            throw Error("bad_dims", to_string(kind) + " expects " +
                                        std::to_string(count) + " dimension(s)");
        for (int d : dims)
            if (d <= 0) throw Error("bad_dims", "dimensions must be positive");
    };

    std::vector<std::pair<int, int>> edges;
    switch (kind) {
        case LatticeKind::chain: {
            need(1);
            const int len = dims[0];
            for (int i = 0; i + 1 < len; ++i) edges.emplace_back(i, i + 1);
            return GraphTopology(len, std::move(edges));
        }
        case LatticeKind::cycle: {
            need(1);
            const int len = dims[0];
            if (len < 3) throw Error("bad_dims", "cycle needs at least 3 nodes");
            for (int i = 0; i + 1 < len; ++i) edges.emplace_back(i, i + 1);
            edges.emplace_back(0, len - 1);
            return GraphTopology(len, std::move(edges));
        }
        case LatticeKind::grid2d: {
            need(2);
            const int nx = dims[0], ny = dims[1];
            auto id = [nx](int x, int y) { return x + nx * y; };
            for (int y = 0; y < ny; ++y)
                for (int x = 0; x < nx; ++x) {
                    if (x + 1 < nx) edges.emplace_back(id(x, y), id(x + 1, y));
                    if (y + 1 < ny) edges.emplace_back(id(x, y), id(x, y + 1));
                }
            return GraphTopology(nx * ny, std::move(edges));
        }
        case LatticeKind::grid3d: {
            need(3);
            const int nx = dims[0], ny = dims[1], nz = dims[2];
            auto id = [nx, ny](int x, int y, int z) { return x + nx * (y + ny * z); };
            for (int z = 0; z < nz; ++z)
                for (int y = 0; y < ny; ++y)
                    for (int x = 0; x < nx; ++x) {
                        if (x + 1 < nx) edges.emplace_back(id(x, y, z), id(x + 1, y, z));
                        if (y + 1 < ny) edges.emplace_back(id(x, y, z), id(x, y + 1, z));
                        if (z + 1 < nz) edges.emplace_back(id(x, y, z), id(x, y, z + 1));
                    }
            return GraphTopology(nx * ny * nz, std::move(edges));
        }
    }
    throw Error("bad_dims", "unreachable");
}

}  // namespace spinid

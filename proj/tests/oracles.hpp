#pragma once

// Independent reference implementations used only by the tests.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <queue>
#include <vector>

#include <qab/topology.hpp>

namespace qab::oracle {

struct BestMatching {
    std::size_t cardinality = 0;
    double weight = 0.0;
    std::vector<QubitPair> pairs;  // sorted
};

// Exhaustive enumeration over every matching: maximize cardinality, then
// minimize weight, then take the lexicographically smallest sorted pair list.
inline BestMatching brute_force_min_weight(const CouplingGraph& graph, const std::vector<double>& weights) {
    const std::size_t n = graph.num_qubits();
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);  // (neighbour, edge index)
    for (std::size_t i = 0; i < graph.edges().size(); ++i) {
        const auto& e = graph.edges()[i];
        adj[e.first].push_back({e.second, i});
    }
    BestMatching best;
    bool have = false;
    std::vector<bool> used(n, false);
    std::vector<QubitPair> current;

    auto consider = [&](double w) {
        auto sorted = current;
        std::sort(sorted.begin(), sorted.end());
        const bool better = !have || sorted.size() > best.cardinality ||
                            (sorted.size() == best.cardinality &&
                             (w < best.weight || (w == best.weight && sorted < best.pairs)));
        if (better) {
            have = true;
            best = {sorted.size(), w, sorted};
        }
    };

    // Decide each vertex in order: skip it, or pair it with a higher neighbour.
    auto rec = [&](auto&& self, std::size_t v, double w) -> void {
        while (v < n && used[v]) ++v;
        if (v >= n) {
            consider(w);
            return;
        }
        used[v] = true;
        self(self, v + 1, w);
        for (auto [u, idx] : adj[v]) {
            if (used[u]) continue;
            used[u] = true;
            current.emplace_back(v, u);
            self(self, v + 1, w + weights[idx]);
            current.pop_back();
            used[u] = false;
        }
        used[v] = false;
    };
    rec(rec, 0, 0.0);
    return best;
}

// Edmonds' cardinality-only blossom algorithm (BFS with base contraction).
inline std::size_t max_cardinality(const CouplingGraph& graph) {
    const std::size_t n = graph.num_qubits();
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& e : graph.edges()) {
        adj[e.first].push_back(e.second);
        adj[e.second].push_back(e.first);
    }
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> match(n, none), parent(n), base(n);
    std::vector<bool> used(n), blossom(n);

    auto lca = [&](std::size_t a, std::size_t b) {
        std::vector<bool> seen(n, false);
        while (true) {
            a = base[a];
            seen[a] = true;
            if (match[a] == none) break;
            a = parent[match[a]];
        }
        while (true) {
            b = base[b];
            if (seen[b]) return b;
            b = parent[match[b]];
        }
    };
    auto mark_path = [&](std::size_t v, std::size_t b, std::size_t child) {
        while (base[v] != b) {
            blossom[base[v]] = blossom[base[match[v]]] = true;
            parent[v] = child;
            child = match[v];
            v = parent[match[v]];
        }
    };
    auto find_path = [&](std::size_t root) -> std::size_t {
        std::fill(used.begin(), used.end(), false);
        std::fill(parent.begin(), parent.end(), none);
        std::iota(base.begin(), base.end(), std::size_t{0});
        used[root] = true;
        std::queue<std::size_t> q;
        q.push(root);
        while (!q.empty()) {
            const std::size_t v = q.front();
            q.pop();
            for (std::size_t to : adj[v]) {
                if (base[v] == base[to] || match[v] == to) continue;
                if (to == root || (match[to] != none && parent[match[to]] != none)) {
                    const std::size_t cur = lca(v, to);
                    std::fill(blossom.begin(), blossom.end(), false);
                    mark_path(v, cur, to);
                    mark_path(to, cur, v);
                    for (std::size_t i = 0; i < n; ++i) {
                        if (blossom[base[i]]) {
                            base[i] = cur;
                            if (!used[i]) {
                                used[i] = true;
                                q.push(i);
                            }
                        }
                    }
                } else if (parent[to] == none) {
                    parent[to] = v;
                    if (match[to] == none) return to;
                    used[match[to]] = true;
                    q.push(match[to]);
                }
            }
        }
        return none;
    };

    std::size_t size = 0;
    for (std::size_t v = 0; v < n; ++v) {
        if (match[v] != none) continue;
        std::size_t u = find_path(v);
        if (u == none) continue;
        ++size;
        while (u != none) {
            const std::size_t pv = parent[u];
            const std::size_t ppv = match[pv];
            match[u] = pv;
            match[pv] = u;
            u = ppv;
        }
    }
    return size;
}

// Random simple graph on n vertices with edge probability p.
template <typename R>
inline CouplingGraph random_graph(std::size_t n, double p, R& rng) {
    std::vector<QubitPair> edges;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (rng.uniform() < p) edges.emplace_back(a, b);
        }
    }
    return {"random", n, std::move(edges)};
}

}  // namespace qab::oracle

#pragma once

/**
 * @file matching.hpp
 * @brief Maximum-cardinality minimum-weight matching on coupling graphs.
 *
 * Weights are quantized to integers (relative resolution 2^-40 of the largest
 * weight) and complemented, w' = M - w, so that a maximum-cardinality
 * maximum-weight matching of w' is a minimum-weight matching among the
 * maximum-cardinality ones. Among equal-weight optima the lexicographically
 * smallest sorted pair list is returned.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "blossom.hpp"
#include "topology.hpp"

namespace qab {

/// A coupling graph with one non-negative weight per edge (same order as graph.edges()).
struct WeightedGraph {
    CouplingGraph base;
    std::vector<double> edge_weights;

    WeightedGraph(CouplingGraph graph, std::vector<double> weights)
        : base(std::move(graph)), edge_weights(std::move(weights)) {
        if (edge_weights.size() != base.edges().size()) throw std::invalid_argument("one weight per edge required");
        for (double w : edge_weights) {
            if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("edge weights must be finite and >= 0");
        }
    }
};

/// W_jk = |theta_j - theta_k| on every edge.
inline WeightedGraph weights_from_angles(const CouplingGraph& graph, std::span<const double> theta) {
    if (theta.size() != graph.num_qubits()) throw std::invalid_argument("one angle per qubit required");
    std::vector<double> weights;
    weights.reserve(graph.edges().size());
    for (const auto& e : graph.edges()) weights.push_back(std::abs(theta[e.first] - theta[e.second]));
    return {graph, std::move(weights)};
}

namespace detail {

struct IntegerOptimum {
    std::size_t cardinality = 0;
    std::int64_t weight = 0;  ///< total quantized weight
    std::vector<long> mate;
};

// Maximum-cardinality minimum-weight matching over the edges whose endpoints
// are both still available.
inline IntegerOptimum solve_restricted(std::size_t n, std::span<const QubitPair> edges,
                                       std::span<const std::int64_t> weights, const std::vector<bool>& removed) {
    std::int64_t top = 0;
    for (std::size_t i = 0; i < edges.size(); ++i) top = std::max(top, weights[i]);
    const std::int64_t complement = top + 1;
    std::vector<blossom::Edge<std::int64_t>> live;
    live.reserve(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (removed[edges[i].first] || removed[edges[i].second]) continue;
        live.push_back({edges[i].first, edges[i].second, complement - weights[i]});
    }
    IntegerOptimum out;
    out.mate = blossom::max_weight_matching(n, live, true);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        if (out.mate[e.first] == static_cast<long>(e.second)) {
            ++out.cardinality;
            out.weight += weights[i];
        }
    }
    return out;
}

inline std::vector<std::int64_t> quantize(std::span<const double> weights) {
    double top = 0.0;
    for (double w : weights) top = std::max(top, w);
    // Largest power of two keeping the scaled maximum within 2^40.
    double scale = 1.0;
    if (top > 0.0) scale = std::ldexp(1.0, 40 - std::ilogb(top) - 1);
    std::vector<std::int64_t> out;
    out.reserve(weights.size());
    for (double w : weights) out.push_back(std::llround(w * scale));
    return out;
}

}  // namespace detail

/// Among all maximum-cardinality matchings, one of minimum total weight.
/// Ties are broken towards the lexicographically smallest sorted pair list.
inline Matching min_weight_matching(const WeightedGraph& wg) {
    const auto& graph = wg.base;
    const std::size_t n = graph.num_qubits();
    if (graph.edges().empty()) return Matching::from_pairs(graph, {});

    // Edges sorted by pair, with their quantized weights.
    std::vector<std::size_t> order(graph.edges().size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return graph.edges()[a] < graph.edges()[b]; });
    const auto quantized = detail::quantize(wg.edge_weights);
    std::vector<QubitPair> edges;
    std::vector<std::int64_t> weights;
    for (auto i : order) {
        edges.push_back(graph.edges()[i]);
        weights.push_back(quantized[i]);
    }

    std::vector<bool> removed(n, false);
    const auto optimum = detail::solve_restricted(n, edges, weights, removed);

    std::vector<QubitPair> chosen;
    std::int64_t chosen_weight = 0;
    for (std::size_t i = 0; i < edges.size() && chosen.size() < optimum.cardinality; ++i) {
        const auto& e = edges[i];
        if (removed[e.first] || removed[e.second]) continue;
        removed[e.first] = removed[e.second] = true;
        const auto rest = detail::solve_restricted(n, edges, weights, removed);
        if (rest.cardinality + chosen.size() + 1 == optimum.cardinality &&
            rest.weight + chosen_weight + weights[i] == optimum.weight) {
            chosen.push_back(e);
            chosen_weight += weights[i];
        } else {
            removed[e.first] = removed[e.second] = false;
        }
    }
    return Matching::from_pairs(graph, std::move(chosen));
}

/// Total weight of a matching's pairs under a weighted graph.
inline double matching_weight(const WeightedGraph& wg, const Matching& m) {
    double total = 0.0;
    for (const auto& p : m.pairs) {
        auto idx = wg.base.edge_index(p);
        if (!idx) throw std::invalid_argument("matching pair is not an edge");
        total += wg.edge_weights[*idx];
    }
    return total;
}

}  // namespace qab

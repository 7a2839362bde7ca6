#pragma once

/**
 * @file topology.hpp
 * @brief Coupling graphs of real and example devices, and random pairings on them.
 *
 * Real-device edge sets are data: one JSON file per device in a catalog
 * directory. Parametric families (line, ladder, square lattice, complete
 * graph) are generated in code.
 */

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "blossom.hpp"
#include "rng.hpp"

#ifndef QAB_DEFAULT_DEVICES_DIR
#define QAB_DEFAULT_DEVICES_DIR "devices"
#endif

namespace qab {

using Qubit = std::size_t;

/// Unordered qubit pair, normalized so that first < second.
struct QubitPair {
    Qubit first = 0;
    Qubit second = 0;

    QubitPair() = default;
    QubitPair(Qubit a, Qubit b) : first(std::min(a, b)), second(std::max(a, b)) {}

    bool contains(Qubit q) const noexcept { return q == first || q == second; }
    auto operator<=>(const QubitPair&) const = default;
};

/// Thrown for invalid graphs, matchings and unknown devices.
class TopologyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Bijective base-26 label: 0 -> "a", 25 -> "z", 26 -> "aa", ...
inline std::string edge_label(std::size_t index) {
    std::string label;
    std::size_t n = index + 1;
    while (n > 0) {
        --n;
        label.insert(label.begin(), static_cast<char>('a' + n % 26));
        n /= 26;
    }
    return label;
}

/// Device connectivity. Immutable once constructed.
class CouplingGraph {
public:
    CouplingGraph(std::string name, std::size_t num_qubits, std::vector<QubitPair> edges)
        : name_(std::move(name)), num_qubits_(num_qubits), edges_(std::move(edges)) {
        std::set<QubitPair> seen;
        for (const auto& e : edges_) {
            if (e.first == e.second) throw TopologyError(name_ + ": self-loop on qubit " + std::to_string(e.first));
            if (e.second >= num_qubits_) {
                throw TopologyError(name_ + ": edge endpoint " + std::to_string(e.second) + " out of range");
            }
            if (!seen.insert(e).second) {
                throw TopologyError(name_ + ": duplicate edge (" + std::to_string(e.first) + "," +
                                    std::to_string(e.second) + ")");
            }
        }
        labels_.reserve(edges_.size());
        for (std::size_t i = 0; i < edges_.size(); ++i) labels_.push_back(edge_label(i));
    }

    const std::string& name() const noexcept { return name_; }
    std::size_t num_qubits() const noexcept { return num_qubits_; }
    const std::vector<QubitPair>& edges() const noexcept { return edges_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    bool has_edge(QubitPair p) const { return std::find(edges_.begin(), edges_.end(), p) != edges_.end(); }

    std::optional<std::size_t> edge_index(std::string_view label) const {
        auto it = std::find(labels_.begin(), labels_.end(), label);
        if (it == labels_.end()) return std::nullopt;
        return static_cast<std::size_t>(it - labels_.begin());
    }

    std::optional<std::size_t> edge_index(QubitPair p) const {
        auto it = std::find(edges_.begin(), edges_.end(), p);
        if (it == edges_.end()) return std::nullopt;
        return static_cast<std::size_t>(it - edges_.begin());
    }

private:
    std::string name_;
    std::size_t num_qubits_;
    std::vector<QubitPair> edges_;
    std::vector<std::string> labels_;
};

/// A set of vertex-disjoint pairs; pairs and unpaired qubits are kept sorted.
struct Matching {
    std::vector<QubitPair> pairs;
    std::vector<Qubit> unpaired;

    bool operator==(const Matching&) const = default;

    /// Builds a matching from pairs; throws if the pairs overlap, are not
    /// edges of the graph, or reference unknown qubits.
    static Matching from_pairs(const CouplingGraph& graph, std::vector<QubitPair> pairs) {
        std::vector<bool> used(graph.num_qubits(), false);
        for (const auto& p : pairs) {
            if (p.second >= graph.num_qubits()) throw TopologyError("pair references unknown qubit");
            if (!graph.has_edge(p)) {
                throw TopologyError("pair (" + std::to_string(p.first) + "," + std::to_string(p.second) +
                                    ") is not an edge of " + graph.name());
            }
            if (used[p.first] || used[p.second]) {
                throw TopologyError("pairs are not disjoint at (" + std::to_string(p.first) + "," +
                                    std::to_string(p.second) + ")");
            }
            used[p.first] = used[p.second] = true;
        }
        Matching m;
        m.pairs = std::move(pairs);
        std::sort(m.pairs.begin(), m.pairs.end());
        for (Qubit q = 0; q < graph.num_qubits(); ++q) {
            if (!used[q]) m.unpaired.push_back(q);
        }
        return m;
    }

    /// Partner of each qubit, or nullopt when unpaired.
    std::vector<std::optional<Qubit>> partners(std::size_t num_qubits) const {
        std::vector<std::optional<Qubit>> out(num_qubits);
        for (const auto& p : pairs) {
            out[p.first] = p.second;
            out[p.second] = p.first;
        }
        return out;
    }
};

namespace detail {

inline std::size_t parse_size_suffix(std::string_view name, std::string_view prefix) {
    const auto digits = name.substr(prefix.size());
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        throw TopologyError("unknown device: " + std::string(name));
    }
    return static_cast<std::size_t>(std::stoul(std::string(digits)));
}

}  // namespace detail

inline CouplingGraph line_graph(std::size_t n) {
    if (n < 2) throw TopologyError("line_N requires N >= 2");
    std::vector<QubitPair> edges;
    for (Qubit q = 0; q + 1 < n; ++q) edges.emplace_back(q, q + 1);
    return {"line_" + std::to_string(n), n, std::move(edges)};
}

/// Two paths of n/2 qubits (0..n/2-1 and n/2..n-1) joined by n/2 rungs.
inline CouplingGraph ladder_graph(std::size_t n) {
    if (n < 2 || n % 2 != 0) throw TopologyError("ladder_N requires an even N >= 2");
    const std::size_t half = n / 2;
    std::vector<QubitPair> edges;
    for (Qubit q = 0; q + 1 < half; ++q) edges.emplace_back(q, q + 1);
    for (Qubit q = half; q + 1 < n; ++q) edges.emplace_back(q, q + 1);
    for (Qubit q = 0; q < half; ++q) edges.emplace_back(q, q + half);
    return {"ladder_" + std::to_string(n), n, std::move(edges)};
}

/// Row-major sqrt(n) x sqrt(n) grid.
inline CouplingGraph square_graph(std::size_t n) {
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    if (n < 4 || side * side != n) throw TopologyError("square_N requires N to be a perfect square >= 4");
    std::vector<QubitPair> edges;
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            const Qubit q = r * side + c;
            if (c + 1 < side) edges.emplace_back(q, q + 1);
            if (r + 1 < side) edges.emplace_back(q, q + side);
        }
    }
    return {"square_" + std::to_string(n), n, std::move(edges)};
}

inline CouplingGraph complete_graph(std::size_t n) {
    if (n < 2) throw TopologyError("complete_N requires N >= 2");
    std::vector<QubitPair> edges;
    for (Qubit a = 0; a < n; ++a) {
        for (Qubit b = a + 1; b < n; ++b) edges.emplace_back(a, b);
    }
    return {"complete_" + std::to_string(n), n, std::move(edges)};
}

/// Resolves a parametric family name (line_N, ladder_N, square_N, complete_N).
inline std::optional<CouplingGraph> parametric_device(std::string_view name) {
    if (name.starts_with("line_")) return line_graph(detail::parse_size_suffix(name, "line_"));
    if (name.starts_with("ladder_")) return ladder_graph(detail::parse_size_suffix(name, "ladder_"));
    if (name.starts_with("square_")) return square_graph(detail::parse_size_suffix(name, "square_"));
    if (name.starts_with("complete_")) return complete_graph(detail::parse_size_suffix(name, "complete_"));
    return std::nullopt;
}

/// Parses a device document {"name", "num_qubits", "edges": [[a,b],...]}.
/// Other fields (layout, notes) are ignored.
inline CouplingGraph graph_from_json(const nlohmann::json& doc) {
    try {
        std::vector<QubitPair> edges;
        for (const auto& e : doc.at("edges")) {
            if (!e.is_array() || e.size() != 2) throw TopologyError("edges must be [int,int] pairs");
            edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
        }
        return {doc.at("name").get<std::string>(), doc.at("num_qubits").get<std::size_t>(), std::move(edges)};
    } catch (const nlohmann::json::exception& ex) {
        throw TopologyError(std::string("malformed device document: ") + ex.what());
    }
}

inline nlohmann::json graph_to_json(const CouplingGraph& graph) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : graph.edges()) edges.push_back({e.first, e.second});
    return {{"name", graph.name()}, {"num_qubits", graph.num_qubits()}, {"edges", std::move(edges)}};
}

/// Example-device families evaluated alongside the real devices.
inline std::vector<std::string> example_device_names() {
    return {"line_5",     "line_11",    "line_15",    "line_19",    "ladder_4",   "ladder_10",
            "ladder_16",  "ladder_20",  "square_4",   "square_9",   "square_16",  "complete_5",
            "complete_11", "complete_16", "complete_19"};
}

/// Device lookup: JSON files in a directory, then parametric families.
class Catalog {
public:
    explicit Catalog(std::filesystem::path devices_dir = default_dir()) : dir_(std::move(devices_dir)) {
        if (!std::filesystem::is_directory(dir_)) return;
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& path : files) {
            std::ifstream in(path);
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& ex) {
                throw TopologyError(path.string() + ": " + ex.what());
            }
            auto graph = graph_from_json(doc);
            documents_.emplace(graph.name(), doc);
            devices_.emplace(graph.name(), std::move(graph));
        }
        for (const auto& [name, _] : devices_) names_.push_back(name);
    }

    /// QAB_DEVICES_DIR if set, else the directory configured at build time.
    static std::filesystem::path default_dir() {
        if (const char* env = std::getenv("QAB_DEVICES_DIR"); env != nullptr && *env != '\0') return env;
        return QAB_DEFAULT_DEVICES_DIR;
    }

    const std::filesystem::path& directory() const noexcept { return dir_; }

    /// Names of devices loaded from files.
    const std::vector<std::string>& file_devices() const noexcept { return names_; }

    /// File devices followed by the example families.
    std::vector<std::string> names() const {
        auto out = names_;
        auto examples = example_device_names();
        out.insert(out.end(), examples.begin(), examples.end());
        return out;
    }

    bool contains(std::string_view name) const {
        try {
            (void)device(name);
            return true;
        } catch (const TopologyError&) {
            return false;
        }
    }

    CouplingGraph device(std::string_view name) const {
        if (auto it = devices_.find(std::string(name)); it != devices_.end()) return it->second;
        if (auto graph = parametric_device(name)) return *graph;
        throw TopologyError("unknown device: " + std::string(name));
    }

    /// The device's file document (with layout/notes), or the generated JSON.
    nlohmann::json document(std::string_view name) const {
        if (auto it = documents_.find(std::string(name)); it != documents_.end()) return it->second;
        return graph_to_json(device(name));
    }

private:
    std::filesystem::path dir_;
    std::map<std::string, CouplingGraph> devices_;
    std::map<std::string, nlohmann::json> documents_;
    std::vector<std::string> names_;
};

/// Random maximal matching: shuffle the edge list and greedily accept
/// disjoint edges, then augment to maximum cardinality while keeping as many
/// of the greedy edges as possible. Deterministic given the stream state.
/// Not uniform over matchings.
inline Matching random_maximal_matching(const CouplingGraph& graph, Rng& rng) {
    if (graph.edges().empty()) throw TopologyError(graph.name() + ": cannot pair qubits of an edgeless graph");
    std::vector<std::size_t> order(graph.edges().size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(std::span<std::size_t>(order));

    std::vector<bool> used(graph.num_qubits(), false);
    std::vector<bool> greedy(graph.edges().size(), false);
    std::vector<QubitPair> pairs;
    for (std::size_t idx : order) {
        const auto& e = graph.edges()[idx];
        if (!used[e.first] && !used[e.second]) {
            used[e.first] = used[e.second] = true;
            greedy[idx] = true;
            pairs.push_back(e);
        }
    }

    std::vector<blossom::Edge<long long>> edges;
    edges.reserve(graph.edges().size());
    for (std::size_t i = 0; i < graph.edges().size(); ++i) {
        edges.push_back({graph.edges()[i].first, graph.edges()[i].second, greedy[i] ? 2LL : 1LL});
    }
    const auto mate = blossom::max_weight_matching(graph.num_qubits(), edges, true);
    std::size_t cardinality = 0;
    for (Qubit q = 0; q < graph.num_qubits(); ++q) {
        if (mate[q] > static_cast<long>(q)) ++cardinality;
    }
    if (cardinality > pairs.size()) {
        pairs.clear();
        for (Qubit q = 0; q < graph.num_qubits(); ++q) {
            if (mate[q] > static_cast<long>(q)) pairs.emplace_back(q, static_cast<Qubit>(mate[q]));
        }
    }
    return Matching::from_pairs(graph, std::move(pairs));
}

}  // namespace qab

#pragma once

/**
 * @file analysis.hpp
 * @brief Per-round figures of merit (fuzz, pairing success, angle diff) and
 * mutual-information error mitigation.
 */

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "matching.hpp"
#include "simulator.hpp"
#include "slices.hpp"

namespace qab {

class AnalysisError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// theta_j = asin(sqrt(p_j)), with p clamped to [0, 1] first.
inline std::vector<double> infer_angles(std::span<const double> p) {
    std::vector<double> theta;
    theta.reserve(p.size());
    for (double x : p) theta.push_back(std::asin(std::sqrt(std::clamp(x, 0.0, 1.0))));
    return theta;
}

inline double infer_angle(double p) { return std::asin(std::sqrt(std::clamp(p, 0.0, 1.0))); }

/// Mean |p_j - p_k| over the slice's pairs.
inline double compute_fuzz(const EntanglingSlice& slice, std::span<const double> p) {
    const auto& pairs = slice.matching.pairs;
    if (pairs.empty()) throw AnalysisError("fuzz is undefined for a slice without pairs");
    double total = 0.0;
    for (const auto& pr : pairs) total += std::abs(p[pr.first] - p[pr.second]);
    return total / static_cast<double>(pairs.size());
}

/// Mean |theta_q - theta_jk| over both qubits of every pair.
inline double compute_diff(const EntanglingSlice& slice, std::span<const double> theta) {
    const auto& pairs = slice.matching.pairs;
    if (pairs.empty()) throw AnalysisError("diff is undefined for a slice without pairs");
    double total = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        total += std::abs(theta[pairs[i].first] - slice.angles[i]) + std::abs(theta[pairs[i].second] - slice.angles[i]);
    }
    return total / (2.0 * static_cast<double>(pairs.size()));
}

/// |deduced ∩ truth| / |truth|.
inline double pairing_overlap(const Matching& truth, const Matching& deduced) {
    if (truth.pairs.empty()) throw AnalysisError("success rate needs at least one true pair");
    std::size_t hits = 0;
    for (const auto& p : truth.pairs) {
        if (std::binary_search(deduced.pairs.begin(), deduced.pairs.end(), p)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(truth.pairs.size());
}

/// Deduces the pairing by min-weight matching on |theta_j - theta_k| and
/// returns the fraction of true pairs it recovers.
inline double compute_success(const CouplingGraph& graph, const Matching& truth, std::span<const double> theta) {
    if (truth.pairs.empty()) throw AnalysisError("success rate needs at least one true pair");
    return pairing_overlap(truth, min_weight_matching(weights_from_angles(graph, theta)));
}

/// Pairwise mutual information of measurement outcomes, in bits.
struct CorrelationTable {
    std::size_t num_qubits = 0;
    std::vector<double> mi;         ///< row-major n x n, diagonal zero
    std::vector<std::size_t> partner;  ///< c(j)

    double at(std::size_t a, std::size_t b) const { return mi[a * num_qubits + b]; }
};

/// Below this many bits a qubit is treated as uncorrelated; its partner is itself.
inline constexpr double kMinPartnerInformation = 1e-12;

namespace detail {

inline double mutual_information_bits(double p11, double pa, double pb) {
    const double joint[4] = {1.0 - pa - pb + p11, pb - p11, pa - p11, p11};  // 00, 01, 10, 11
    const double ma[2] = {1.0 - pa, pa};
    const double mb[2] = {1.0 - pb, pb};
    double total = 0.0;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const double pab = joint[a * 2 + b];
            if (pab <= 0.0) continue;
            const double denom = ma[a] * mb[b];
            if (denom <= 0.0) continue;
            total += pab * std::log2(pab / denom);
        }
    }
    return std::max(total, 0.0);
}

inline CorrelationTable table_from_joints(std::size_t n, std::span<const double> marginals,
                                          std::span<const double> joint11) {
    CorrelationTable t;
    t.num_qubits = n;
    t.mi.assign(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            const double v = mutual_information_bits(joint11[a * n + b], marginals[a], marginals[b]);
            t.mi[a * n + b] = t.mi[b * n + a] = v;
        }
    }
    t.partner.resize(n);
    for (std::size_t a = 0; a < n; ++a) {
        std::size_t best = a;
        double best_mi = kMinPartnerInformation;
        for (std::size_t b = 0; b < n; ++b) {
            if (b != a && t.mi[a * n + b] > best_mi) {
                best_mi = t.mi[a * n + b];
                best = b;
            }
        }
        t.partner[a] = best;
    }
    return t;
}

}  // namespace detail

inline CorrelationTable mutual_information(const ShotRecord& rec) {
    if (rec.shots < 1) throw AnalysisError("mutual information needs at least one shot");
    const std::size_t n = rec.num_qubits;
    std::vector<double> ones(n, 0.0);
    std::vector<double> both(n * n, 0.0);
    std::vector<std::size_t> set_bits;
    for (const auto& [outcome, count] : rec.counts) {
        set_bits.clear();
        for (std::size_t q = 0; q < n; ++q) {
            if ((outcome >> q) & 1U) set_bits.push_back(q);
        }
        const auto c = static_cast<double>(count);
        for (std::size_t x = 0; x < set_bits.size(); ++x) {
            ones[set_bits[x]] += c;
            for (std::size_t y = x + 1; y < set_bits.size(); ++y) both[set_bits[x] * n + set_bits[y]] += c;
        }
    }
    const auto shots = static_cast<double>(rec.shots);
    for (auto& x : ones) x /= shots;
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) both[b * n + a] = both[a * n + b] = both[a * n + b] / shots;
    }
    return detail::table_from_joints(n, ones, both);
}

inline CorrelationTable mutual_information(const ExactDistribution& dist) {
    if (!dist.has_joints()) throw AnalysisError("exact distribution lacks pair joints");
    return detail::table_from_joints(dist.num_qubits, dist.marginals, dist.joint11);
}

inline CorrelationTable mutual_information(const Measurement& m) {
    if (m.shots) return mutual_information(*m.shots);
    if (m.exact) return mutual_information(*m.exact);
    throw AnalysisError("empty measurement");
}

/// p̄_j = (p̃_j + p̃_c(j)) / 2.
inline std::vector<double> mitigate(std::span<const double> p, const CorrelationTable& table) {
    if (table.partner.size() != p.size()) throw AnalysisError("correlation table size mismatch");
    std::vector<double> out(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) out[j] = (p[j] + p[table.partner[j]]) / 2.0;
    return out;
}

/// One variant (raw or mitigated) of the per-round figures of merit.
struct MetricSet {
    double fuzz = 0.0;
    double success = 0.0;
    double diff = 0.0;

    bool operator==(const MetricSet&) const = default;
};

struct RoundMetrics {
    std::optional<MetricSet> raw;
    std::optional<MetricSet> mitigated;

    bool operator==(const RoundMetrics&) const = default;
};

inline MetricSet evaluate(const CouplingGraph& graph, const EntanglingSlice& slice, std::span<const double> p) {
    const auto theta = infer_angles(p);
    return {compute_fuzz(slice, p), compute_success(graph, slice.matching, theta), compute_diff(slice, theta)};
}

/// Monte Carlo estimate of the success rate when the measured values carry
/// no information about the pairing: p_j i.i.d. uniform on [0,1].
inline double random_guess_baseline(const CouplingGraph& graph, std::size_t trials, Rng& rng) {
    double total = 0.0;
    std::vector<double> p(graph.num_qubits());
    for (std::size_t t = 0; t < trials; ++t) {
        const auto truth = random_maximal_matching(graph, rng);
        for (auto& x : p) x = rng.uniform();
        total += compute_success(graph, truth, infer_angles(p));
    }
    return total / static_cast<double>(trials);
}

}  // namespace qab

#pragma once

/**
 * @file protocol.hpp
 * @brief The iterative round structure.
 *
 * Run k executes the completed rounds 1..k-1, each as S_r (I_r E_r) S_r^dagger,
 * followed by the bare entangling slice E_k, and measures. The measurement
 * is used to deduce the inverse slice I_k; a random conjugation layer S_k then
 * completes the round.
 */

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "analysis.hpp"
#include "backend.hpp"
#include "matching.hpp"
#include "slices.hpp"
#include "topology.hpp"

namespace qab {

class ProtocolError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ProtocolOptions {
    std::optional<std::uint64_t> shots;  ///< nullopt: exact probabilities
    NoiseModel noise;
    bool raw_metrics = true;
    bool mitigated_metrics = false;
    /// emulated-stat-noise adds +-0.1/sqrt(shots) with a random sign per pair
    /// instead of the constant +0.1/sqrt(shots).
    bool random_stat_noise_sign = false;
};

struct RoundRecord {
    std::size_t round_index = 0;  ///< 1-based
    EntanglingSlice entangling;
    std::optional<InverseSlice> inverse;
    std::optional<ConjugationLayer> conjugation;
    Measurement measurement;
    std::vector<double> p_tilde;
    std::vector<double> theta_tilde;
    std::optional<std::vector<double>> p_bar;
    RoundMetrics metrics;
};

inline EntanglingSlice next_entangling_slice(const CouplingGraph& graph, Rng& rng) {
    EntanglingSlice slice;
    slice.matching = random_maximal_matching(graph, rng);
    slice.angles.reserve(slice.matching.pairs.size());
    for (std::size_t i = 0; i < slice.matching.pairs.size(); ++i) {
        slice.angles.push_back(rng.uniform(kMinEntanglingAngle, kMaxEntanglingAngle));
    }
    return slice;
}

inline ConjugationLayer random_conjugation_layer(std::size_t num_qubits, Rng& rng) {
    ConjugationLayer layer;
    layer.rotations.reserve(num_qubits);
    for (std::size_t q = 0; q < num_qubits; ++q) {
        const Axis axis = rng.below(2) == 0 ? Axis::X : Axis::Y;
        layer.rotations.push_back({axis, rng.uniform(0.0, std::numbers::pi / 2.0)});
    }
    return layer;
}

/// Inputs that only some inverse strategies use.
struct InverseInputs {
    std::optional<std::uint64_t> shots;       ///< emulated-stat-noise; nullopt adds nothing
    const Matching* player_pairs = nullptr;   ///< player-pairs
    bool random_stat_noise_sign = false;
};

/// Deduces an inverse slice from the measured one-probabilities.
inline InverseSlice build_inverse(const CouplingGraph& graph, const EntanglingSlice& entangling,
                                  std::span<const double> p_tilde, InverseMode mode, Rng& rng,
                                  const InverseInputs& inputs = {}) {
    if (p_tilde.size() != graph.num_qubits()) throw ProtocolError("one probability per qubit required");
    InverseSlice inv;
    inv.mode = mode;
    switch (mode) {
        case InverseMode::TruePairs:
        case InverseMode::EmulatedStatNoise:
            inv.assumed_matching = entangling.matching;
            break;
        case InverseMode::RandomPairs:
            inv.assumed_matching = random_maximal_matching(graph, rng);
            break;
        case InverseMode::MwpmPairs:
            inv.assumed_matching = min_weight_matching(weights_from_angles(graph, infer_angles(p_tilde)));
            break;
        case InverseMode::PlayerPairs:
            if (inputs.player_pairs == nullptr) throw ProtocolError("player-pairs needs a pairing");
            inv.assumed_matching = Matching::from_pairs(graph, inputs.player_pairs->pairs);
            break;
    }

    const auto& pairs = inv.assumed_matching.pairs;
    inv.assumed_angles.reserve(pairs.size());
    if (mode == InverseMode::EmulatedStatNoise) {
        const double offset = inputs.shots ? 0.1 / std::sqrt(static_cast<double>(*inputs.shots)) : 0.0;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            double sign = 1.0;
            if (inputs.random_stat_noise_sign) sign = rng.below(2) == 0 ? 1.0 : -1.0;
            inv.assumed_angles.push_back(entangling.angles[i] + sign * offset);
        }
    } else {
        for (const auto& pr : pairs) {
            inv.assumed_angles.push_back(infer_angle((p_tilde[pr.first] + p_tilde[pr.second]) / 2.0));
        }
    }
    for (auto& a : inv.assumed_angles) a = std::clamp(a, 0.0, std::numbers::pi / 2.0);
    return inv;
}

/// One protocol run, advanced round by round. Circuit generation and
/// execution draw from separate streams, so two runs from the same seed see
/// the same slices regardless of how their inverses differ.
class ProtocolRun {
public:
    ProtocolRun(CouplingGraph graph, ProtocolOptions options, Rng& rng, std::unique_ptr<Backend> backend = nullptr)
        : graph_(std::move(graph)),
          options_(options),
          circuit_rng_(rng.split()),
          exec_rng_(rng.split()),
          backend_(backend ? std::move(backend) : std::make_unique<LocalSimulator>(options.noise)) {
        options_.noise.validate();
        if (options_.shots && *options_.shots < 1) throw ProtocolError("shots must be at least 1");
        if (graph_.edges().empty()) throw ProtocolError(graph_.name() + " has no edges");
        completed_.num_qubits = graph_.num_qubits();
        start_round();
    }

    const CouplingGraph& graph() const noexcept { return graph_; }
    const ProtocolOptions& options() const noexcept { return options_; }
    const std::vector<RoundRecord>& records() const noexcept { return records_; }

    /// The measured round awaiting its inverse slice.
    const RoundRecord& current() const { return records_.back(); }

    /// Deduces the current round's inverse with one of the strategies.
    InverseSlice deduce(InverseMode mode, const Matching* player_pairs = nullptr) {
        InverseInputs inputs{options_.shots, player_pairs, options_.random_stat_noise_sign};
        return build_inverse(graph_, current().entangling, current().p_tilde, mode, circuit_rng_, inputs);
    }

    /// Completes the current round with `inverse` and a fresh conjugation
    /// layer. When `execute_next` is set, runs the next round's circuit.
    void complete(InverseSlice inverse, bool execute_next = true) {
        auto& rec = records_.back();
        if (rec.inverse) throw ProtocolError("round already completed");
        rec.inverse = std::move(inverse);
        rec.conjugation = random_conjugation_layer(graph_.num_qubits(), circuit_rng_);
        completed_.layers.push_back(rec.conjugation->inverse());
        completed_.layers.push_back(PairLayer{pair_gates(rec.entangling.matching, rec.entangling.angles), 1.0});
        completed_.layers.push_back(
            PairLayer{pair_gates(rec.inverse->assumed_matching, rec.inverse->assumed_angles), -1.0});
        completed_.layers.push_back(*rec.conjugation);
        if (execute_next) start_round();
    }

private:
    CouplingGraph graph_;
    ProtocolOptions options_;
    Rng circuit_rng_;
    Rng exec_rng_;
    std::unique_ptr<Backend> backend_;
    Circuit completed_;
    std::vector<RoundRecord> records_;

    void start_round() {
        RoundRecord rec;
        rec.round_index = records_.size() + 1;
        rec.entangling = next_entangling_slice(graph_, circuit_rng_);

        Circuit circuit = completed_;
        circuit.checkpoint = completed_.layers.size();
        circuit.layers.push_back(PairLayer{pair_gates(rec.entangling.matching, rec.entangling.angles), 1.0});
        MeasureOptions mopts;
        mopts.shots = options_.shots;
        mopts.pair_joints = options_.mitigated_metrics;
        rec.measurement = backend_->execute(circuit, mopts, exec_rng_);

        rec.p_tilde = rec.measurement.marginals();
        for (auto& p : rec.p_tilde) p = std::clamp(p, 0.0, 1.0);
        rec.theta_tilde = infer_angles(rec.p_tilde);
        if (options_.raw_metrics) rec.metrics.raw = evaluate(graph_, rec.entangling, rec.p_tilde);
        if (options_.mitigated_metrics) {
            rec.p_bar = mitigate(rec.p_tilde, mutual_information(rec.measurement));
            rec.metrics.mitigated = evaluate(graph_, rec.entangling, *rec.p_bar);
        }
        records_.push_back(std::move(rec));
    }
};

/// Runs `rounds` rounds with a fixed inverse strategy.
inline std::vector<RoundRecord> run_protocol(const CouplingGraph& graph, std::size_t rounds, InverseMode strategy,
                                             const ProtocolOptions& options, Rng& rng) {
    if (rounds < 1) throw ProtocolError("at least one round required");
    if (strategy == InverseMode::PlayerPairs) throw ProtocolError("player-pairs needs an interactive session");
    ProtocolRun run(graph, options, rng);
    for (std::size_t k = 1; k <= rounds; ++k) {
        run.complete(run.deduce(strategy), k < rounds);
    }
    return run.records();
}

}  // namespace qab

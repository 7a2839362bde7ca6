#pragma once

/**
 * @file backend.hpp
 * @brief Execution backends. A backend runs a layered circuit from |0...0>
 * and returns a measurement. LocalSimulator is the only implementation that
 * ships; a device client would implement the same interface.
 */

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "simulator.hpp"

namespace qab {

/// XX-rotations on disjoint pairs, applied with angle sign * theta.
struct PairLayer {
    std::vector<PairGate> gates;
    double sign = 1.0;

    bool operator==(const PairLayer&) const = default;
};

using Layer = std::variant<PairLayer, ConjugationLayer>;

struct Circuit {
    std::size_t num_qubits = 0;
    std::vector<Layer> layers;
    /// Layers [0, checkpoint) are shared with later executions of the same run.
    std::size_t checkpoint = 0;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string name() const = 0;
    virtual Measurement execute(const Circuit& circuit, const MeasureOptions& opts, Rng& rng) = 0;
};

/// Statevector backend with trajectory noise. When gates are noiseless, the
/// state after the checkpoint prefix is cached and reused by the next
/// execution whose circuit extends it.
class LocalSimulator final : public Backend {
public:
    explicit LocalSimulator(NoiseModel noise = {}) : noise_(noise) { noise_.validate(); }

    std::string name() const override { return "local-simulator"; }
    const NoiseModel& noise() const noexcept { return noise_; }

    /// Noise events of the most recent execution are appended here when set.
    void set_trajectory_log(TrajectoryLog* log) noexcept { log_ = log; }

    Measurement execute(const Circuit& circuit, const MeasureOptions& opts, Rng& rng) override {
        StateVector state = prepare(circuit, rng);
        return measure(state, opts, noise_, rng);
    }

    /// Final state of the circuit (for tests and diagnostics).
    StateVector run(const Circuit& circuit, Rng& rng) { return prepare(circuit, rng); }

private:
    NoiseModel noise_;
    TrajectoryLog* log_ = nullptr;
    std::optional<StateVector> cached_state_;
    std::vector<Layer> cached_layers_;

    void apply(StateVector& state, const Layer& layer, Rng& rng) {
        if (const auto* pl = std::get_if<PairLayer>(&layer)) {
            apply_pair_layer(state, pl->gates, pl->sign, noise_, rng, log_);
        } else {
            apply_layer(state, std::get<ConjugationLayer>(layer), noise_, rng, log_);
        }
    }

    bool cache_usable(const Circuit& circuit) const {
        if (!cached_state_ || cached_state_->num_qubits() != circuit.num_qubits) return false;
        if (cached_layers_.size() > circuit.checkpoint) return false;
        for (std::size_t i = 0; i < cached_layers_.size(); ++i) {
            if (!(cached_layers_[i] == circuit.layers[i])) return false;
        }
        return true;
    }

    StateVector prepare(const Circuit& circuit, Rng& rng) {
        if (!noise_.gates_noiseless()) {
            StateVector state(circuit.num_qubits);
            for (const auto& layer : circuit.layers) apply(state, layer, rng);
            return state;
        }
        if (!cache_usable(circuit)) {
            cached_state_.emplace(circuit.num_qubits);
            cached_layers_.clear();
        }
        for (std::size_t i = cached_layers_.size(); i < circuit.checkpoint; ++i) {
            apply(*cached_state_, circuit.layers[i], rng);
            cached_layers_.push_back(circuit.layers[i]);
        }
        StateVector state = *cached_state_;
        for (std::size_t i = circuit.checkpoint; i < circuit.layers.size(); ++i) apply(state, circuit.layers[i], rng);
        return state;
    }
};

}  // namespace qab

#pragma once

/**
 * @file simulator.hpp
 * @brief Dense statevector simulation of the XX-rotation / single-qubit
 * rotation gate set, with Pauli-trajectory depolarizing noise and readout error.
 *
 * Bit order is little-endian: qubit q is bit q of the basis-state index.
 */

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"
#include "slices.hpp"

namespace qab {

inline constexpr std::size_t kMaxQubits = 24;

class SimulationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Per-gate depolarizing rates and readout flip probability.
struct NoiseModel {
    double p1 = 0.0;       ///< after each one-qubit gate
    double p2 = 0.0;       ///< after each two-qubit gate
    double readout = 0.0;  ///< per measured bit

    bool operator==(const NoiseModel&) const = default;

    /// Rates representative of 2018-era superconducting devices.
    static NoiseModel typical() { return {0.001, 0.02, 0.03}; }

    bool gates_noiseless() const noexcept { return p1 == 0.0 && p2 == 0.0; }

    void validate() const {
        for (double p : {p1, p2, readout}) {
            if (!(p >= 0.0 && p <= 1.0)) throw SimulationError("noise probabilities must lie in [0,1]");
        }
    }
};

class StateVector {
public:
    using amplitude_type = std::complex<double>;

    explicit StateVector(std::size_t num_qubits) : num_qubits_(num_qubits) {
        if (num_qubits < 1 || num_qubits > kMaxQubits) {
            throw SimulationError("state size must be between 1 and " + std::to_string(kMaxQubits) + " qubits");
        }
        amplitudes_.assign(std::size_t{1} << num_qubits, amplitude_type{0.0, 0.0});
        amplitudes_[0] = 1.0;
    }

    std::size_t num_qubits() const noexcept { return num_qubits_; }
    std::size_t dimension() const noexcept { return amplitudes_.size(); }
    std::span<const amplitude_type> amplitudes() const noexcept { return amplitudes_; }
    std::span<amplitude_type> amplitudes() noexcept { return amplitudes_; }
    const amplitude_type& operator[](std::size_t i) const { return amplitudes_[i]; }

    double norm_squared() const {
        double total = 0.0;
        for (const auto& a : amplitudes_) total += std::norm(a);
        return total;
    }

    void check_qubit(Qubit q) const {
        if (q >= num_qubits_) throw SimulationError("qubit index " + std::to_string(q) + " out of range");
    }

    bool operator==(const StateVector&) const = default;

private:
    std::size_t num_qubits_;
    std::vector<amplitude_type> amplitudes_;
};

inline StateVector new_state(std::size_t num_qubits) { return StateVector(num_qubits); }

namespace detail {

// Calls f(i, i | bit) for every index i with the given bit clear.
template <typename F>
inline void for_each_bit_pair(std::size_t dimension, std::size_t bit, F&& f) {
    for (std::size_t base = 0; base < dimension; base += 2 * bit) {
        for (std::size_t i = base; i < base + bit; ++i) f(i, i | bit);
    }
}

}  // namespace detail

/// exp(i theta X_j X_k).
inline void apply_xx(StateVector& state, Qubit j, Qubit k, double theta) {
    state.check_qubit(j);
    state.check_qubit(k);
    if (j == k) throw SimulationError("apply_xx requires two distinct qubits");
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const std::size_t bj = std::size_t{1} << j;
    const std::size_t flip = bj | (std::size_t{1} << k);
    auto amps = state.amplitudes();
    detail::for_each_bit_pair(state.dimension(), bj, [&](std::size_t i, std::size_t) {
        const std::size_t p = i ^ flip;
        const auto a = amps[i];
        const auto b = amps[p];
        amps[i] = {c * a.real() - s * b.imag(), c * a.imag() + s * b.real()};
        amps[p] = {c * b.real() - s * a.imag(), c * b.imag() + s * a.real()};
    });
}

/// exp(i phi sigma_axis) = cos(phi) I + i sin(phi) sigma_axis.
inline void apply_rot(StateVector& state, Qubit j, Axis axis, double phi) {
    state.check_qubit(j);
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    auto amps = state.amplitudes();
    const std::size_t bit = std::size_t{1} << j;
    if (axis == Axis::X) {
        detail::for_each_bit_pair(state.dimension(), bit, [&](std::size_t i0, std::size_t i1) {
            const auto a = amps[i0];
            const auto b = amps[i1];
            amps[i0] = {c * a.real() - s * b.imag(), c * a.imag() + s * b.real()};
            amps[i1] = {c * b.real() - s * a.imag(), c * b.imag() + s * a.real()};
        });
    } else {
        // i sigma_y = [[0, 1], [-1, 0]]
        detail::for_each_bit_pair(state.dimension(), bit, [&](std::size_t i0, std::size_t i1) {
            const auto a = amps[i0];
            const auto b = amps[i1];
            amps[i0] = c * a + s * b;
            amps[i1] = c * b - s * a;
        });
    }
}

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

inline char pauli_char(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

inline void apply_pauli(StateVector& state, Qubit j, Pauli pauli) {
    state.check_qubit(j);
    auto amps = state.amplitudes();
    const std::size_t bit = std::size_t{1} << j;
    switch (pauli) {
        case Pauli::I: return;
        case Pauli::X:
            detail::for_each_bit_pair(state.dimension(), bit,
                                      [&](std::size_t i0, std::size_t i1) { std::swap(amps[i0], amps[i1]); });
            return;
        case Pauli::Y: {
            const std::complex<double> i_unit{0.0, 1.0};
            detail::for_each_bit_pair(state.dimension(), bit, [&](std::size_t i0, std::size_t i1) {
                const auto a = amps[i0];
                amps[i0] = -i_unit * amps[i1];
                amps[i1] = i_unit * a;
            });
            return;
        }
        case Pauli::Z:
            detail::for_each_bit_pair(state.dimension(), bit, [&](std::size_t, std::size_t i1) { amps[i1] = -amps[i1]; });
            return;
    }
}

/// A Pauli error inserted by the trajectory noise model.
struct NoiseEvent {
    std::vector<Qubit> qubits;
    std::string paulis;  ///< one of "XYZ" per qubit, in the order of `qubits`

    bool operator==(const NoiseEvent&) const = default;
};

using TrajectoryLog = std::vector<NoiseEvent>;

/// One XX-rotation of a slice.
struct PairGate {
    QubitPair qubits;
    double theta = 0.0;

    bool operator==(const PairGate&) const = default;
};

namespace detail {

inline void maybe_two_qubit_error(StateVector& state, QubitPair pair, const NoiseModel& noise, Rng& rng,
                                  TrajectoryLog* log) {
    if (noise.p2 <= 0.0 || !rng.bernoulli(noise.p2)) return;
    const auto which = 1 + rng.below(15);  // non-identity element of {I,X,Y,Z}^2
    const auto pa = static_cast<Pauli>(which % 4);
    const auto pb = static_cast<Pauli>(which / 4);
    apply_pauli(state, pair.first, pa);
    apply_pauli(state, pair.second, pb);
    if (log != nullptr) {
        NoiseEvent ev;
        if (pa != Pauli::I) {
            ev.qubits.push_back(pair.first);
            ev.paulis.push_back(pauli_char(pa));
        }
        if (pb != Pauli::I) {
            ev.qubits.push_back(pair.second);
            ev.paulis.push_back(pauli_char(pb));
        }
        log->push_back(std::move(ev));
    }
}

inline void maybe_one_qubit_error(StateVector& state, Qubit q, const NoiseModel& noise, Rng& rng,
                                  TrajectoryLog* log) {
    if (noise.p1 <= 0.0 || !rng.bernoulli(noise.p1)) return;
    const auto pauli = static_cast<Pauli>(1 + rng.below(3));
    apply_pauli(state, q, pauli);
    if (log != nullptr) log->push_back({{q}, std::string(1, pauli_char(pauli))});
}

}  // namespace detail

/// Applies XX-rotations on disjoint pairs, each optionally followed by a
/// random non-identity two-qubit Pauli with probability noise.p2.
inline void apply_pair_layer(StateVector& state, std::span<const PairGate> gates, double sign,
                             const NoiseModel& noise, Rng& rng, TrajectoryLog* log = nullptr) {
    for (const auto& g : gates) {
        apply_xx(state, g.qubits.first, g.qubits.second, sign * g.theta);
        detail::maybe_two_qubit_error(state, g.qubits, noise, rng, log);
    }
}

inline std::vector<PairGate> pair_gates(const Matching& matching, std::span<const double> angles) {
    if (matching.pairs.size() != angles.size()) throw SimulationError("slice angles do not match its pairs");
    std::vector<PairGate> gates;
    gates.reserve(angles.size());
    for (std::size_t i = 0; i < angles.size(); ++i) gates.push_back({matching.pairs[i], angles[i]});
    return gates;
}

inline void apply_slice(StateVector& state, const EntanglingSlice& slice, const NoiseModel& noise, Rng& rng,
                        TrajectoryLog* log = nullptr) {
    const auto gates = pair_gates(slice.matching, slice.angles);
    apply_pair_layer(state, gates, 1.0, noise, rng, log);
}

inline void apply_slice(StateVector& state, const InverseSlice& slice, const NoiseModel& noise, Rng& rng,
                        TrajectoryLog* log = nullptr) {
    const auto gates = pair_gates(slice.assumed_matching, slice.assumed_angles);
    apply_pair_layer(state, gates, -1.0, noise, rng, log);
}

inline void apply_layer(StateVector& state, const ConjugationLayer& layer, const NoiseModel& noise, Rng& rng,
                        TrajectoryLog* log = nullptr) {
    if (layer.rotations.size() != state.num_qubits()) throw SimulationError("conjugation layer size mismatch");
    for (Qubit q = 0; q < layer.rotations.size(); ++q) {
        apply_rot(state, q, layer.rotations[q].axis, layer.rotations[q].phi);
        detail::maybe_one_qubit_error(state, q, noise, rng, log);
    }
}

/// Sampled measurement outcomes; keys are little-endian basis indices.
struct ShotRecord {
    std::size_t num_qubits = 0;
    std::uint64_t shots = 0;
    std::map<std::uint64_t, std::uint64_t> counts;

    bool operator==(const ShotRecord&) const = default;

    std::vector<double> marginals() const {
        std::vector<double> ones(num_qubits, 0.0);
        for (const auto& [outcome, count] : counts) {
            for (std::size_t q = 0; q < num_qubits; ++q) {
                if ((outcome >> q) & 1U) ones[q] += static_cast<double>(count);
            }
        }
        for (auto& x : ones) x /= static_cast<double>(shots);
        return ones;
    }
};

/// Exact outcome statistics, with readout error already folded in.
struct ExactDistribution {
    std::size_t num_qubits = 0;
    std::vector<double> probabilities;  ///< empty unless requested; excludes readout error
    std::vector<double> marginals;      ///< P(q = 1)
    std::vector<double> joint11;        ///< P(a = 1, b = 1), row-major n x n; empty unless requested

    bool has_joints() const noexcept { return !joint11.empty(); }
    double joint(std::size_t a, std::size_t b) const { return joint11[a * num_qubits + b]; }
};

/// Result of one execution: either shots or an exact distribution.
struct Measurement {
    std::optional<ShotRecord> shots;
    std::optional<ExactDistribution> exact;

    std::vector<double> marginals() const {
        if (shots) return shots->marginals();
        if (exact) return exact->marginals;
        return {};
    }
};

struct MeasureOptions {
    std::optional<std::uint64_t> shots;  ///< nullopt selects exact mode
    bool pair_joints = false;            ///< exact mode: also compute all pair joints
    bool keep_probabilities = false;     ///< exact mode: keep the full probability vector
};

namespace detail {

inline double flip_marginal(double p, double r) { return p * (1.0 - r) + (1.0 - p) * r; }

inline ExactDistribution exact_distribution(const StateVector& state, const NoiseModel& noise,
                                            const MeasureOptions& opts) {
    const std::size_t n = state.num_qubits();
    ExactDistribution out;
    out.num_qubits = n;
    out.marginals.assign(n, 0.0);
    if (opts.pair_joints) out.joint11.assign(n * n, 0.0);
    if (opts.keep_probabilities) out.probabilities.resize(state.dimension());

    const auto amps = state.amplitudes();
    std::vector<std::size_t> set_bits;
    set_bits.reserve(n);
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double p = std::norm(amps[i]);
        if (opts.keep_probabilities) out.probabilities[i] = p;
        if (p == 0.0) continue;
        set_bits.clear();
        for (std::size_t rest = i; rest != 0; rest &= rest - 1) {
            set_bits.push_back(static_cast<std::size_t>(std::countr_zero(rest)));
        }
        for (std::size_t a : set_bits) out.marginals[a] += p;
        if (opts.pair_joints) {
            for (std::size_t x = 0; x < set_bits.size(); ++x) {
                for (std::size_t y = x + 1; y < set_bits.size(); ++y) out.joint11[set_bits[x] * n + set_bits[y]] += p;
            }
        }
    }
    if (opts.pair_joints) {
        for (std::size_t a = 0; a < n; ++a) {
            out.joint11[a * n + a] = out.marginals[a];
            for (std::size_t b = a + 1; b < n; ++b) out.joint11[b * n + a] = out.joint11[a * n + b];
        }
    }

    const double r = noise.readout;
    if (r > 0.0) {
        if (opts.pair_joints) {
            // P'(1,1) = sum over true outcomes of P(a',b') f(a'->1) f(b'->1)
            for (std::size_t a = 0; a < n; ++a) {
                for (std::size_t b = 0; b < n; ++b) {
                    if (a == b) continue;
                    const double p11 = out.joint11[a * n + b];
                    const double p10 = out.marginals[a] - p11;
                    const double p01 = out.marginals[b] - p11;
                    const double p00 = 1.0 - out.marginals[a] - out.marginals[b] + p11;
                    out.joint11[a * n + b] =
                        p11 * (1 - r) * (1 - r) + (p10 + p01) * r * (1 - r) + p00 * r * r;
                }
            }
        }
        for (auto& m : out.marginals) m = flip_marginal(m, r);
        if (opts.pair_joints) {
            for (std::size_t a = 0; a < n; ++a) out.joint11[a * n + a] = out.marginals[a];
        }
    }
    return out;
}

inline ShotRecord sample_shots(const StateVector& state, std::uint64_t shots, const NoiseModel& noise, Rng& rng) {
    const auto amps = state.amplitudes();
    std::vector<double> cumulative(amps.size());
    double total = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        total += std::norm(amps[i]);
        cumulative[i] = total;
    }
    ShotRecord rec;
    rec.num_qubits = state.num_qubits();
    rec.shots = shots;
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = rng.uniform() * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) --it;
        auto outcome = static_cast<std::uint64_t>(it - cumulative.begin());
        if (noise.readout > 0.0) {
            for (std::size_t q = 0; q < state.num_qubits(); ++q) {
                if (rng.bernoulli(noise.readout)) outcome ^= std::uint64_t{1} << q;
            }
        }
        ++rec.counts[outcome];
    }
    return rec;
}

}  // namespace detail

/// Z-basis measurement of every qubit. With opts.shots set, samples that many
/// bitstrings (each bit flipped with probability noise.readout); otherwise
/// returns exact marginals with readout error applied analytically.
inline Measurement measure(const StateVector& state, const MeasureOptions& opts, const NoiseModel& noise, Rng& rng) {
    noise.validate();
    Measurement m;
    if (opts.shots) {
        if (*opts.shots < 1) throw SimulationError("shots must be at least 1");
        m.shots = detail::sample_shots(state, *opts.shots, noise, rng);
    } else {
        m.exact = detail::exact_distribution(state, noise, opts);
    }
    return m;
}

}  // namespace qab

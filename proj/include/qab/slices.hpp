#pragma once

#include <array>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "topology.hpp"

namespace qab {

/// Bounds of the entangling angle theta_jk.
inline constexpr double kMinEntanglingAngle = std::numbers::pi / 40.0;
inline constexpr double kMaxEntanglingAngle = std::numbers::pi / 4.0;

/// A layer of XX-rotations on disjoint pairs. angles[i] belongs to matching.pairs[i].
struct EntanglingSlice {
    Matching matching;
    std::vector<double> angles;

    bool operator==(const EntanglingSlice&) const = default;

    double angle_of(QubitPair pair) const {
        for (std::size_t i = 0; i < matching.pairs.size(); ++i) {
            if (matching.pairs[i] == pair) return angles[i];
        }
        throw std::out_of_range("pair not in slice");
    }
};

/// How the pairing of an inverse slice was chosen.
enum class InverseMode {
    TruePairs,
    RandomPairs,
    MwpmPairs,
    PlayerPairs,
    EmulatedStatNoise,
};

inline constexpr std::array<InverseMode, 5> kAllInverseModes = {
    InverseMode::TruePairs, InverseMode::RandomPairs, InverseMode::MwpmPairs, InverseMode::PlayerPairs,
    InverseMode::EmulatedStatNoise};

inline std::string_view to_string(InverseMode mode) {
    switch (mode) {
        case InverseMode::TruePairs: return "true-pairs";
        case InverseMode::RandomPairs: return "random-pairs";
        case InverseMode::MwpmPairs: return "mwpm-pairs";
        case InverseMode::PlayerPairs: return "player-pairs";
        case InverseMode::EmulatedStatNoise: return "emulated-stat-noise";
    }
    return "?";
}

inline std::optional<InverseMode> parse_inverse_mode(std::string_view name) {
    for (auto mode : kAllInverseModes) {
        if (to_string(mode) == name) return mode;
    }
    return std::nullopt;
}

/// The attempted inversion of an entangling slice; applied with negated angles.
struct InverseSlice {
    Matching assumed_matching;
    std::vector<double> assumed_angles;
    InverseMode mode = InverseMode::TruePairs;

    bool operator==(const InverseSlice&) const = default;
};

enum class Axis { X, Y };

/// exp(i phi sigma_axis) on one qubit.
struct Rotation {
    Axis axis = Axis::X;
    double phi = 0.0;

    bool operator==(const Rotation&) const = default;
};

/// One random rotation per qubit, phi in [0, pi/2].
struct ConjugationLayer {
    std::vector<Rotation> rotations;

    bool operator==(const ConjugationLayer&) const = default;

    ConjugationLayer inverse() const {
        ConjugationLayer out = *this;
        for (auto& r : out.rotations) r.phi = -r.phi;
        return out;
    }
};

}  // namespace qab

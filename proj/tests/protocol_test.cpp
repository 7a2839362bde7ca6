#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include <qab/protocol.hpp>

namespace qab {
namespace {

constexpr double kPi = std::numbers::pi;

ProtocolOptions exact_noiseless() {
    ProtocolOptions o;
    o.noise = NoiseModel{0, 0, 0};
    return o;
}

TEST(InferAngles, Examples) {
    EXPECT_NEAR(infer_angle(0.5), kPi / 4, 1e-15);
    EXPECT_EQ(infer_angle(0.0), 0.0);
    const double p = std::pow(std::sin(kPi / 40), 2);
    EXPECT_NEAR(p, 0.00616, 1e-5);
    EXPECT_NEAR(infer_angle(p), kPi / 40, 1e-12);
    // Out-of-range estimates are clamped.
    EXPECT_EQ(infer_angle(-0.01), 0.0);
    EXPECT_NEAR(infer_angle(1.2), kPi / 2, 1e-15);
}

TEST(EntanglingSlice, LineTwoIsForced) {
    Rng rng(1);
    const auto s = next_entangling_slice(line_graph(2), rng);
    ASSERT_EQ(s.matching.pairs.size(), 1u);
    EXPECT_EQ(s.matching.pairs[0], QubitPair(0, 1));
    EXPECT_GE(s.angles[0], kPi / 40);
    EXPECT_LE(s.angles[0], kPi / 4);
}

TEST(EntanglingSlice, AngleDistributionMoments) {
    Rng rng(77);
    const auto g = line_graph(2);
    const int draws = 10000;
    double lo = 10, hi = -10, sum = 0;
    for (int i = 0; i < draws; ++i) {
        const double a = next_entangling_slice(g, rng).angles[0];
        lo = std::min(lo, a);
        hi = std::max(hi, a);
        sum += a;
    }
    EXPECT_GE(lo, kPi / 40);
    EXPECT_LE(hi, kPi / 4);
    const double a = kPi / 40, b = kPi / 4;
    const double mean = (a + b) / 2;
    EXPECT_NEAR(mean, 0.432, 5e-4);
    const double sigma = (b - a) / std::sqrt(12.0) / std::sqrt(static_cast<double>(draws));
    EXPECT_NEAR(sum / draws, mean, 3 * sigma);
}

TEST(EntanglingSlice, SameSeedSameSlice) {
    const auto g = ladder_graph(10);
    Rng a(5), b(5);
    const auto sa = next_entangling_slice(g, a);
    const auto sb = next_entangling_slice(g, b);
    EXPECT_EQ(sa.matching, sb.matching);
    EXPECT_EQ(sa.angles, sb.angles);
}

TEST(BuildInverse, TruePairsRecoverRoundOneAngles) {
    const auto g = ladder_graph(8);
    Rng rng(3);
    const auto slice = next_entangling_slice(g, rng);
    std::vector<double> p(8, 0.0);
    for (std::size_t i = 0; i < slice.matching.pairs.size(); ++i) {
        const auto& pr = slice.matching.pairs[i];
        p[pr.first] = p[pr.second] = std::pow(std::sin(slice.angles[i]), 2);
    }
    for (auto mode : {InverseMode::TruePairs, InverseMode::MwpmPairs}) {
        const auto inv = build_inverse(g, slice, p, mode, rng);
        EXPECT_EQ(inv.assumed_matching, slice.matching);
        for (std::size_t i = 0; i < slice.angles.size(); ++i) EXPECT_NEAR(inv.assumed_angles[i], slice.angles[i], 1e-12);
    }
}

TEST(BuildInverse, EmulatedStatNoiseAddsConstant) {
    const auto g = line_graph(2);
    const EntanglingSlice slice{Matching::from_pairs(g, {{0, 1}}), {0.3}};
    Rng rng(0);
    InverseInputs in;
    in.shots = 100;
    const auto inv = build_inverse(g, slice, std::vector<double>{0.9, 0.1}, InverseMode::EmulatedStatNoise, rng, in);
    EXPECT_EQ(inv.assumed_matching, slice.matching);
    EXPECT_NEAR(inv.assumed_angles[0], 0.31, 1e-15);

    in.random_stat_noise_sign = true;
    int below = 0;
    for (int i = 0; i < 200; ++i) {
        const double a = build_inverse(g, slice, std::vector<double>{0, 0}, InverseMode::EmulatedStatNoise, rng, in)
                             .assumed_angles[0];
        EXPECT_NEAR(std::abs(a - 0.3), 0.01, 1e-15);
        below += a < 0.3;
    }
    EXPECT_GT(below, 50);
    EXPECT_LT(below, 150);
}

TEST(BuildInverse, RandomPairsIgnoreMeasurements) {
    const auto g = complete_graph(4);
    const EntanglingSlice slice{Matching::from_pairs(g, {{0, 1}, {2, 3}}), {0.3, 0.5}};
    const std::vector<double> p = {0.1, 0.2, 0.3, 0.4};
    const std::vector<double> permuted = {0.4, 0.3, 0.1, 0.2};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng a(seed), b(seed);
        const auto ia = build_inverse(g, slice, p, InverseMode::RandomPairs, a);
        const auto ib = build_inverse(g, slice, permuted, InverseMode::RandomPairs, b);
        EXPECT_EQ(ia.assumed_matching, ib.assumed_matching);
        // Angles still come from the pair averages of the assumed pairs.
        for (std::size_t i = 0; i < ia.assumed_matching.pairs.size(); ++i) {
            const auto& pr = ia.assumed_matching.pairs[i];
            EXPECT_DOUBLE_EQ(ia.assumed_angles[i], infer_angle((p[pr.first] + p[pr.second]) / 2));
        }
    }
}

TEST(BuildInverse, PlayerPairsValidated) {
    const auto g = line_graph(4);
    const EntanglingSlice slice{Matching::from_pairs(g, {{0, 1}, {2, 3}}), {0.3, 0.5}};
    Rng rng(0);
    const std::vector<double> p(4, 0.1);
    EXPECT_THROW(build_inverse(g, slice, p, InverseMode::PlayerPairs, rng), ProtocolError);
    Matching bad;
    bad.pairs = {QubitPair(0, 2)};
    InverseInputs in;
    in.player_pairs = &bad;
    EXPECT_THROW(build_inverse(g, slice, p, InverseMode::PlayerPairs, rng, in), TopologyError);
    const auto good = Matching::from_pairs(g, {{1, 2}});
    in.player_pairs = &good;
    const auto inv = build_inverse(g, slice, p, InverseMode::PlayerPairs, rng, in);
    EXPECT_EQ(inv.assumed_matching.pairs, std::vector<QubitPair>{QubitPair(1, 2)});
}

TEST(RunProtocol, TwoQubitRoundOneLaw) {
    Rng rng(9);
    const auto recs = run_protocol(line_graph(2), 1, InverseMode::TruePairs, exact_noiseless(), rng);
    ASSERT_EQ(recs.size(), 1u);
    const double theta = recs[0].entangling.angles[0];
    EXPECT_NEAR(recs[0].p_tilde[0], std::pow(std::sin(theta), 2), 1e-12);
    EXPECT_EQ(recs[0].p_tilde[0], recs[0].p_tilde[1]);
}

TEST(RunProtocol, RoundOneLawEveryDeviceEveryStrategy) {
    const Catalog catalog;
    for (const auto& name : catalog.names()) {
        const auto g = catalog.device(name);
        if (g.num_qubits() > 16) continue;  // the acceptance suite covers the large ones
        for (auto mode : {InverseMode::TruePairs, InverseMode::RandomPairs, InverseMode::MwpmPairs,
                          InverseMode::EmulatedStatNoise}) {
            Rng rng(derive_seed(1, static_cast<std::uint64_t>(mode)));
            const auto recs = run_protocol(g, 1, mode, exact_noiseless(), rng);
            const auto& r = recs.front();
            for (const auto& pr : r.entangling.matching.pairs) EXPECT_EQ(r.p_tilde[pr.first], r.p_tilde[pr.second]);
            for (auto q : r.entangling.matching.unpaired) EXPECT_EQ(r.p_tilde[q], 0.0) << name;
            EXPECT_EQ(r.metrics.raw->success, 1.0) << name;
            EXPECT_EQ(r.metrics.raw->fuzz, 0.0) << name;
        }
    }
}

TEST(RunProtocol, TruePairsNoiselessReturnsToGroundState) {
    for (const char* name : {"ladder_10", "line_11", "ibmqx4", "square_9"}) {
        const auto g = Catalog().device(name);
        Rng rng(17);
        ProtocolRun run(g, exact_noiseless(), rng);
        for (int k = 1; k <= 8; ++k) {
            const auto& r = run.current();
            EXPECT_LE(r.metrics.raw->fuzz, 1e-9);
            EXPECT_LE(r.metrics.raw->diff, 1e-9);
            EXPECT_EQ(r.metrics.raw->success, 1.0);
            run.complete(run.deduce(InverseMode::TruePairs));
        }
    }
}

TEST(RunProtocol, StateBeforeEachEntanglingSliceIsGroundState) {
    const auto g = ladder_graph(8);
    Rng rng(23);
    const auto recs = run_protocol(g, 6, InverseMode::TruePairs, exact_noiseless(), rng);
    LocalSimulator sim;
    Circuit c{g.num_qubits(), {}, 0};
    for (const auto& r : recs) {
        Rng unused(0);
        const auto s = sim.run(c, unused);
        EXPECT_NEAR(std::norm(s.amplitudes()[0]), 1.0, 1e-9) << "round " << r.round_index;
        c.layers.push_back(r.conjugation->inverse());
        c.layers.push_back(PairLayer{pair_gates(r.entangling.matching, r.entangling.angles), 1.0});
        c.layers.push_back(PairLayer{pair_gates(r.inverse->assumed_matching, r.inverse->assumed_angles), -1.0});
        c.layers.push_back(*r.conjugation);
    }
}

TEST(RunProtocol, RandomPairsBuildFuzz) {
    Rng rng(31);
    const auto recs = run_protocol(ladder_graph(10), 4, InverseMode::RandomPairs, exact_noiseless(), rng);
    double later = 0;
    for (std::size_t i = 1; i < recs.size(); ++i) later += recs[i].metrics.raw->fuzz;
    EXPECT_GT(later, 0.0);
    for (const auto& r : recs) {
        for (double p : r.p_tilde) {
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
        }
        for (double t : r.theta_tilde) {
            EXPECT_GE(t, 0.0);
            EXPECT_LE(t, kPi / 2);
        }
    }
}

TEST(RunProtocol, DeterministicReplay) {
    const auto g = ladder_graph(8);
    ProtocolOptions o;
    o.shots = 200;
    o.noise = NoiseModel::typical();
    o.mitigated_metrics = true;
    for (auto mode : {InverseMode::RandomPairs, InverseMode::MwpmPairs}) {
        Rng a(99), b(99);
        const auto ra = run_protocol(g, 4, mode, o, a);
        const auto rb = run_protocol(g, 4, mode, o, b);
        ASSERT_EQ(ra.size(), rb.size());
        for (std::size_t i = 0; i < ra.size(); ++i) {
            EXPECT_EQ(ra[i].p_tilde, rb[i].p_tilde);
            EXPECT_EQ(ra[i].metrics, rb[i].metrics);
            EXPECT_EQ(ra[i].measurement.shots, rb[i].measurement.shots);
            EXPECT_EQ(ra[i].inverse->assumed_angles, rb[i].inverse->assumed_angles);
        }
    }
}

TEST(RunProtocol, ShotModeCountsSumToShots) {
    ProtocolOptions o;
    o.shots = 321;
    o.noise = NoiseModel::typical();
    Rng rng(2);
    const auto recs = run_protocol(ladder_graph(6), 3, InverseMode::MwpmPairs, o, rng);
    for (const auto& r : recs) {
        std::uint64_t total = 0;
        for (const auto& [k, v] : r.measurement.shots->counts) total += v;
        EXPECT_EQ(total, 321u);
    }
}

TEST(RunProtocol, RejectsBadInputs) {
    Rng rng(0);
    EXPECT_THROW(run_protocol(line_graph(3), 0, InverseMode::TruePairs, exact_noiseless(), rng), ProtocolError);
    EXPECT_THROW(run_protocol(line_graph(3), 2, InverseMode::PlayerPairs, exact_noiseless(), rng), ProtocolError);
    ProtocolOptions o;
    o.shots = 0;
    EXPECT_THROW(run_protocol(line_graph(3), 2, InverseMode::TruePairs, o, rng), ProtocolError);
    o.shots.reset();
    o.noise.p2 = 1.5;
    EXPECT_THROW(run_protocol(line_graph(3), 2, InverseMode::TruePairs, o, rng), std::invalid_argument);
}

TEST(ProtocolRun, CompletingTwiceRejected) {
    Rng rng(0);
    ProtocolRun run(line_graph(4), exact_noiseless(), rng);
    run.complete(run.deduce(InverseMode::TruePairs), false);
    EXPECT_THROW(run.complete(run.deduce(InverseMode::TruePairs), false), ProtocolError);
}

}  // namespace
}  // namespace qab

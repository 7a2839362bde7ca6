#pragma once

// Many-sample benchmark runs: samples x strategies independent protocol runs,
// aggregated per round.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "protocol.hpp"
#include "topology.hpp"

namespace qab {

class CampaignError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Mitigation { Off, On, Both };

inline std::string_view to_string(Mitigation m) {
    switch (m) {
        case Mitigation::Off: return "off";
        case Mitigation::On: return "on";
        case Mitigation::Both: return "both";
    }
    return "?";
}

inline std::optional<Mitigation> parse_mitigation(std::string_view s) {
    for (auto m : {Mitigation::Off, Mitigation::On, Mitigation::Both}) {
        if (to_string(m) == s) return m;
    }
    return std::nullopt;
}

struct CampaignSpec {
    std::string device;
    std::vector<InverseMode> strategies;
    std::size_t rounds = 1;
    std::optional<std::uint64_t> shots;  ///< nullopt: exact mode
    std::size_t samples = 1;
    NoiseModel noise;
    std::uint64_t seed = 0;
    Mitigation mitigation = Mitigation::Off;
    bool random_stat_noise_sign = false;
    bool full = false;     ///< keep per-sample round records
    std::size_t jobs = 0;  ///< worker threads; 0 picks the hardware concurrency. Not part of the result.

    bool raw() const { return mitigation != Mitigation::On; }
    bool mitigated() const { return mitigation != Mitigation::Off; }

    void validate() const {
        if (strategies.empty()) throw CampaignError("at least one strategy required");
        for (auto s : strategies) {
            if (s == InverseMode::PlayerPairs) throw CampaignError("player-pairs is only available in a game");
            if (std::count(strategies.begin(), strategies.end(), s) > 1) {
                throw CampaignError("strategy listed twice: " + std::string(to_string(s)));
            }
        }
        if (rounds < 1) throw CampaignError("rounds must be at least 1");
        if (samples < 1) throw CampaignError("samples must be at least 1");
        if (shots && *shots < 1) throw CampaignError("shots must be at least 1");
        noise.validate();
    }
};

/// Seed of one protocol run. Depends only on the master seed, the sample
/// index and the strategy, so adding strategies leaves other runs unchanged.
inline std::uint64_t sample_seed(std::uint64_t master, std::size_t sample, InverseMode strategy) {
    return derive_seed(master, sample, static_cast<std::uint64_t>(strategy));
}

struct SeriesStats {
    std::vector<double> mean;
    std::vector<double> std;

    bool operator==(const SeriesStats&) const = default;
};

/// The persisted part of a RoundRecord. Raw measurement counts are dropped.
struct SampleRound {
    std::size_t round_index = 0;
    EntanglingSlice entangling;
    std::optional<InverseSlice> inverse;
    std::optional<ConjugationLayer> conjugation;
    std::vector<double> p_tilde;
    std::vector<double> theta_tilde;
    std::optional<std::vector<double>> p_bar;
    RoundMetrics metrics;

    bool operator==(const SampleRound&) const = default;
};

struct SampleRun {
    InverseMode strategy = InverseMode::TruePairs;
    std::size_t sample = 0;
    std::uint64_t seed = 0;
    std::vector<SampleRound> rounds;

    bool operator==(const SampleRun&) const = default;
};

inline SampleRound to_sample_round(const RoundRecord& r) {
    return {r.round_index, r.entangling, r.inverse, r.conjugation, r.p_tilde, r.theta_tilde, r.p_bar, r.metrics};
}

/// Metric keys used in series: fuzz, success, diff, and the same with a
/// "_mitigated" suffix.
inline constexpr std::array<std::string_view, 3> kMetricNames = {"fuzz", "success", "diff"};

inline double metric_value(const MetricSet& m, std::string_view name) {
    if (name == "fuzz") return m.fuzz;
    if (name == "success") return m.success;
    if (name == "diff") return m.diff;
    throw CampaignError("unknown metric: " + std::string(name));
}

struct CampaignResult {
    CampaignSpec spec;
    std::optional<CouplingGraph> graph;
    /// strategy name -> metric key -> per-round statistics
    std::map<std::string, std::map<std::string, SeriesStats>> series;
    std::vector<SampleRun> samples;  ///< only with spec.full
    std::string timestamp;
    /// Unrecognized top-level fields from a file written by another version.
    nlohmann::json extras = nlohmann::json::object();
    nlohmann::json spec_extras = nlohmann::json::object();
};

/// Population mean and standard deviation of each column.
inline SeriesStats aggregate(const std::vector<std::vector<double>>& per_sample) {
    SeriesStats s;
    if (per_sample.empty()) return s;
    const std::size_t rounds = per_sample.front().size();
    const auto count = static_cast<double>(per_sample.size());
    s.mean.assign(rounds, 0.0);
    s.std.assign(rounds, 0.0);
    for (std::size_t r = 0; r < rounds; ++r) {
        double sum = 0.0;
        for (const auto& row : per_sample) sum += row[r];
        const double mean = sum / count;
        double sq = 0.0;
        for (const auto& row : per_sample) sq += (row[r] - mean) * (row[r] - mean);
        s.mean[r] = mean;
        s.std[r] = std::sqrt(sq / count);
    }
    return s;
}

/// Recomputes the per-round aggregates from per-sample records.
inline std::map<std::string, std::map<std::string, SeriesStats>> aggregate_samples(
    const std::vector<SampleRun>& runs) {
    // strategy -> metric -> sample rows (in sample order)
    std::map<std::string, std::map<std::string, std::vector<std::vector<double>>>> rows;
    auto ordered = runs;
    std::sort(ordered.begin(), ordered.end(), [](const SampleRun& a, const SampleRun& b) {
        return std::pair(a.strategy, a.sample) < std::pair(b.strategy, b.sample);
    });
    for (const auto& run : ordered) {
        auto& by_metric = rows[std::string(to_string(run.strategy))];
        for (auto name : kMetricNames) {
            std::vector<double> raw, mit;
            for (const auto& r : run.rounds) {
                if (r.metrics.raw) raw.push_back(metric_value(*r.metrics.raw, name));
                if (r.metrics.mitigated) mit.push_back(metric_value(*r.metrics.mitigated, name));
            }
            if (!raw.empty()) by_metric[std::string(name)].push_back(std::move(raw));
            if (!mit.empty()) by_metric[std::string(name) + "_mitigated"].push_back(std::move(mit));
        }
    }
    std::map<std::string, std::map<std::string, SeriesStats>> out;
    for (const auto& [strategy, by_metric] : rows) {
        for (const auto& [metric, samples] : by_metric) out[strategy][metric] = aggregate(samples);
    }
    return out;
}

/// Runs every (sample, strategy) protocol run on a worker pool. Results do not
/// depend on the worker count or completion order. Any failure discards the
/// partial results and is rethrown.
inline CampaignResult run_campaign(const CampaignSpec& spec, const Catalog& catalog = Catalog()) {
    spec.validate();
    CouplingGraph graph = [&] {
        try {
            return catalog.device(spec.device);
        } catch (const TopologyError& ex) {
            throw CampaignError(ex.what());
        }
    }();

    ProtocolOptions options;
    options.shots = spec.shots;
    options.noise = spec.noise;
    options.raw_metrics = spec.raw();
    options.mitigated_metrics = spec.mitigated();
    options.random_stat_noise_sign = spec.random_stat_noise_sign;

    const std::size_t total = spec.samples * spec.strategies.size();
    std::vector<SampleRun> runs(total);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        while (!failed.load()) {
            const std::size_t task = next.fetch_add(1);
            if (task >= total) return;
            const std::size_t sample = task / spec.strategies.size();
            const InverseMode strategy = spec.strategies[task % spec.strategies.size()];
            try {
                SampleRun run;
                run.strategy = strategy;
                run.sample = sample;
                run.seed = sample_seed(spec.seed, sample, strategy);
                Rng rng(run.seed);
                for (const auto& rec : run_protocol(graph, spec.rounds, strategy, options, rng)) {
                    run.rounds.push_back(to_sample_round(rec));
                }
                runs[task] = std::move(run);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
            }
        }
    };

    std::size_t jobs = spec.jobs != 0 ? spec.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, total);
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < jobs; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);

    CampaignResult result;
    result.spec = spec;
    result.graph = graph;
    result.series = aggregate_samples(runs);
    if (spec.full) result.samples = std::move(runs);
    return result;
}

}  // namespace qab

#pragma once

// The pairing-puzzle game. Each round the player sees every qubit's inferred
// angle as a percentage and proposes a pairing; that pairing becomes the
// inverse slice of the live protocol run.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "campaign.hpp"
#include "protocol.hpp"
#include "topology.hpp"

namespace qab {

/// A request the service refuses; `status` is the HTTP status to report.
class GameError : public std::runtime_error {
public:
    GameError(int status, const std::string& message, std::optional<std::string> label = std::nullopt)
        : std::runtime_error(message), status_(status), label_(std::move(label)) {}
    int status() const noexcept { return status_; }
    /// The offending edge label of a rejected pairing.
    const std::optional<std::string>& label() const noexcept { return label_; }

private:
    int status_;
    std::optional<std::string> label_;
};

struct Rgb {
    int r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

/// theta / (pi/2) as a whole percentage, halves rounded away from zero.
inline int angle_percent(double theta) {
    const double pct = std::clamp(theta / (std::numbers::pi / 2.0) * 100.0, 0.0, 100.0);
    return static_cast<int>(std::lround(pct));
}

/// Linear blue (0%) to red (100%) ramp.
inline Rgb percent_color(int percent) {
    const int r = static_cast<int>(std::lround(255.0 * percent / 100.0));
    return {r, 0, 255 - r};
}

inline std::string hex_color(Rgb c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

inline nlohmann::json edges_json(const CouplingGraph& graph) {
    nlohmann::json edges = nlohmann::json::array();
    const auto labels = graph.labels();
    for (std::size_t i = 0; i < graph.edges().size(); ++i) {
        edges.push_back({{"label", labels[i]}, {"endpoints", {graph.edges()[i].first, graph.edges()[i].second}}});
    }
    return edges;
}

inline nlohmann::json puzzle_json(const CouplingGraph& graph, std::size_t round, std::span<const double> theta) {
    nlohmann::json nodes = nlohmann::json::array();
    for (std::size_t q = 0; q < theta.size(); ++q) {
        const int pct = angle_percent(theta[q]);
        const auto c = percent_color(pct);
        nodes.push_back({{"qubit", q},
                         {"percent", pct},
                         {"color", {{"r", c.r}, {"g", c.g}, {"b", c.b}}},
                         {"hex", hex_color(c)}});
    }
    return {{"round", round}, {"nodes", std::move(nodes)}, {"edges", edges_json(graph)}};
}

/// Resolves edge labels to a matching; throws GameError 422 naming the first
/// unknown or overlapping label.
inline Matching pairing_from_labels(const CouplingGraph& graph, const std::vector<std::string>& labels) {
    std::vector<QubitPair> pairs;
    std::set<Qubit> used;
    for (const auto& label : labels) {
        const auto idx = graph.edge_index(label);
        if (!idx) throw GameError(422, "unknown edge label '" + label + "'", label);
        const auto e = graph.edges()[*idx];
        if (used.contains(e.first) || used.contains(e.second)) {
            throw GameError(422, "edge '" + label + "' overlaps another selected edge", label);
        }
        used.insert(e.first);
        used.insert(e.second);
        pairs.push_back(e);
    }
    return Matching::from_pairs(graph, std::move(pairs));
}

struct GameConfig {
    std::optional<std::uint64_t> shots;  ///< default for new games; nullopt is exact mode
    NoiseModel noise = NoiseModel::typical();
    std::chrono::seconds idle_timeout{30 * 60};
    std::size_t max_sessions = 1000;
    std::string default_device;  ///< used when a request names no device
};

struct NewGame {
    std::string device;
    std::optional<std::optional<std::uint64_t>> shots;  ///< unset: service default; nullopt inside: exact
    std::optional<NoiseModel> noise;
    std::optional<std::uint64_t> seed;
};

/// In-memory game sessions. Thread safe; each session handles one request at a
/// time (a concurrent request on the same session gets 409).
class GameService {
public:
    using Clock = std::function<std::chrono::steady_clock::time_point()>;

    explicit GameService(Catalog catalog = Catalog(), GameConfig config = {}, Clock clock = nullptr)
        : catalog_(std::move(catalog)), config_(config), clock_(clock ? std::move(clock) : [] {
              return std::chrono::steady_clock::now();
          }) {
        config_.noise.validate();
    }

    /// Games replay the recorded rounds of a --full results file instead of
    /// simulating. Every sample of the file is a possible game.
    void use_saved_data(CampaignResult saved) {
        if (saved.samples.empty()) throw GameError(400, "saved data has no per-sample records (run with --full)");
        if (!saved.graph) throw GameError(400, "saved data lacks the device graph");
        saved_ = std::make_shared<const CampaignResult>(std::move(saved));
    }

    bool saved_data_mode() const noexcept { return saved_ != nullptr; }

    nlohmann::json devices() const {
        nlohmann::json out = nlohmann::json::array();
        std::vector<std::string> names = saved_ ? std::vector<std::string>{saved_->graph->name()} : catalog_.names();
        for (const auto& name : names) {
            const auto graph = saved_ ? *saved_->graph : catalog_.device(name);
            nlohmann::json d = {{"name", name}, {"num_qubits", graph.num_qubits()}, {"edges", edges_json(graph)}};
            if (!saved_) {
                const auto doc = catalog_.document(name);
                if (doc.contains("layout")) d["layout"] = doc["layout"];
            }
            out.push_back(std::move(d));
        }
        return {{"devices", std::move(out)}};
    }

    /// Starts a game and returns {"id", "puzzle"}.
    nlohmann::json create_game(const NewGame& req) {
        auto session = std::make_shared<Session>();
        session->seed = req.seed ? *req.seed : fresh_seed();
        if (saved_) {
            if (!req.device.empty() && req.device != saved_->graph->name()) {
                throw GameError(404, "this server only plays the saved device " + saved_->graph->name());
            }
            session->graph = *saved_->graph;
            session->saved = saved_;
            session->saved_sample = session->seed % saved_->samples.size();
        } else {
            const std::string& name = req.device.empty() ? config_.default_device : req.device;
            if (name.empty()) throw GameError(400, "field 'device' is required");
            CouplingGraph graph = [&] {
                try {
                    return catalog_.device(name);
                } catch (const TopologyError& ex) {
                    throw GameError(404, ex.what());
                }
            }();
            ProtocolOptions opts;
            opts.shots = req.shots ? *req.shots : config_.shots;
            opts.noise = req.noise ? *req.noise : config_.noise;
            if (opts.shots && *opts.shots < 1) throw GameError(400, "shots must be at least 1");
            try {
                opts.noise.validate();
            } catch (const std::invalid_argument& ex) {
                throw GameError(400, ex.what());
            }
            Rng rng(session->seed);
            session->graph = graph;
            session->run = std::make_unique<ProtocolRun>(std::move(graph), opts, rng);
        }
        session->puzzles.push_back(current_puzzle(*session));

        std::lock_guard lock(mutex_);
        expire_locked();
        if (sessions_.size() >= config_.max_sessions) throw GameError(503, "too many active games");
        std::string id;
        do {
            id = fresh_id();
        } while (sessions_.contains(id) || tombstones_.contains(id));
        session->last_used = clock_();
        sessions_.emplace(id, session);
        return {{"id", id}, {"puzzle", session->puzzles.back()}};
    }

    /// Applies the player's pairing as the inverse slice and advances a round.
    /// Returns {"puzzle", "feedback": {"round", "success"}}.
    nlohmann::json submit_pairing(const std::string& id, const std::vector<std::string>& labels) {
        auto session = find(id);
        std::unique_lock guard(session->busy, std::try_to_lock);
        if (!guard.owns_lock()) throw GameError(409, "a submission for this game is already in progress");
        const auto player = pairing_from_labels(session->graph, labels);

        const std::size_t round = session->round();
        const Matching& truth = session->saved ? session->saved_round().entangling.matching
                                               : session->run->current().entangling.matching;
        const double success = pairing_overlap(truth, player);
        nlohmann::json out;
        if (session->saved) {
            ++session->saved_round_index;
            if (session->saved_round_index >= session->saved_rounds().size()) session->finished = true;
        } else {
            session->run->complete(session->run->deduce(InverseMode::PlayerPairs, &player));
        }
        session->scores.push_back(success);
        out["feedback"] = {{"round", round}, {"success", success}};
        out["finished"] = session->finished;
        if (!session->finished) {
            session->puzzles.push_back(current_puzzle(*session));
            out["puzzle"] = session->puzzles.back();
        }
        touch(*session);
        return out;
    }

    /// {"id", "device", "round", "scores", "puzzles", "finished", "mode"}.
    nlohmann::json get_state(const std::string& id) {
        auto session = find(id);
        std::unique_lock guard(session->busy, std::try_to_lock);
        if (!guard.owns_lock()) throw GameError(409, "a submission for this game is in progress");
        touch(*session);
        return {{"id", id},
                {"device", session->graph.name()},
                {"round", session->round()},
                {"scores", session->scores},
                {"puzzles", session->puzzles},
                {"finished", session->finished},
                {"mode", session->saved ? "saved-data" : "live"}};
    }

    /// The live run's round records, for diagnostics and tests. Not served over HTTP.
    std::vector<RoundRecord> transcript(const std::string& id) {
        auto session = find(id);
        std::lock_guard guard(session->busy);
        if (!session->run) throw GameError(400, "saved-data games have no live transcript");
        return session->run->records();
    }

    std::size_t active_sessions() {
        std::lock_guard lock(mutex_);
        expire_locked();
        return sessions_.size();
    }

private:
    struct Session {
        std::mutex busy;
        std::uint64_t seed = 0;
        CouplingGraph graph{"", 1, {}};
        std::unique_ptr<ProtocolRun> run;
        std::shared_ptr<const CampaignResult> saved;
        std::size_t saved_sample = 0;
        std::size_t saved_round_index = 0;
        bool finished = false;
        std::vector<double> scores;
        std::vector<nlohmann::json> puzzles;
        std::chrono::steady_clock::time_point last_used;

        const std::vector<SampleRound>& saved_rounds() const { return saved->samples[saved_sample].rounds; }
        const SampleRound& saved_round() const { return saved_rounds()[saved_round_index]; }
        std::size_t round() const { return saved ? saved_round_index + 1 : run->current().round_index; }
    };

    Catalog catalog_;
    GameConfig config_;
    Clock clock_;
    std::shared_ptr<const CampaignResult> saved_;
    std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::set<std::string> tombstones_;
    std::random_device entropy_;

    static nlohmann::json current_puzzle(const Session& s) {
        if (s.saved) return puzzle_json(s.graph, s.round(), s.saved_round().theta_tilde);
        return puzzle_json(s.graph, s.round(), s.run->current().theta_tilde);
    }

    std::uint64_t fresh_seed() {
        std::lock_guard lock(mutex_);
        return (static_cast<std::uint64_t>(entropy_()) << 32) ^ entropy_();
    }

    // Called with mutex_ held.
    std::string fresh_id() {
        static constexpr char hex[] = "0123456789abcdef";
        std::string id;
        for (int i = 0; i < 4; ++i) {
            auto x = entropy_();
            for (int k = 0; k < 8; ++k, x >>= 4) id += hex[x & 0xF];
        }
        return id;
    }

    void expire_locked() {
        const auto now = clock_();
        for (auto it = sessions_.begin(); it != sessions_.end();) {
            if (now - it->second->last_used > config_.idle_timeout) {
                tombstones_.insert(it->first);
                it = sessions_.erase(it);
            } else {
                ++it;
            }
        }
    }

    std::shared_ptr<Session> find(const std::string& id) {
        std::lock_guard lock(mutex_);
        expire_locked();
        if (auto it = sessions_.find(id); it != sessions_.end()) return it->second;
        if (tombstones_.contains(id)) throw GameError(410, "game " + id + " expired");
        throw GameError(404, "no game with id " + id);
    }

    void touch(Session& s) {
        std::lock_guard lock(mutex_);
        s.last_used = clock_();
    }
};

}  // namespace qab

#pragma once

// Campaign results file: one JSON document, schema 1.
//
//   {"schema": 1, "bit_order": ..., "timestamp": ..., "spec": {...},
//    "device": {"name", "num_qubits", "edges"},
//    "series": {strategy: {metric: {"mean": [...], "std": [...]}}},
//    "samples": [...]}            // only for --full runs
//
// Unknown top-level and spec fields survive a read/write cycle.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "campaign.hpp"

namespace qab {

inline constexpr int kResultSchema = 1;
inline constexpr const char* kBitOrderNote =
    "little-endian: qubit q is bit q of an outcome index; p_tilde[q] is the probability of reading 1 on qubit q";

/// A results file that cannot be read. The message starts with the JSON path
/// of the offending field.
class ResultFormatError : public std::runtime_error {
public:
    ResultFormatError(const std::string& path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace detail {

using nlohmann::json;

inline json pairs_json(const Matching& m) {
    json out = json::array();
    for (const auto& p : m.pairs) out.push_back({p.first, p.second});
    return out;
}

inline json metrics_json(const MetricSet& m) { return {{"fuzz", m.fuzz}, {"success", m.success}, {"diff", m.diff}}; }

inline json sample_round_json(const SampleRound& r) {
    json j;
    j["round"] = r.round_index;
    j["entangling"] = {{"pairs", pairs_json(r.entangling.matching)}, {"angles", r.entangling.angles}};
    if (r.inverse) {
        j["inverse"] = {{"mode", to_string(r.inverse->mode)},
                        {"pairs", pairs_json(r.inverse->assumed_matching)},
                        {"angles", r.inverse->assumed_angles}};
    }
    if (r.conjugation) {
        json rot = json::array();
        for (const auto& x : r.conjugation->rotations) rot.push_back({{"axis", x.axis == Axis::X ? "x" : "y"}, {"phi", x.phi}});
        j["conjugation"] = std::move(rot);
    }
    j["p_tilde"] = r.p_tilde;
    j["theta_tilde"] = r.theta_tilde;
    if (r.p_bar) j["p_bar"] = *r.p_bar;
    json metrics = json::object();
    if (r.metrics.raw) metrics["raw"] = metrics_json(*r.metrics.raw);
    if (r.metrics.mitigated) metrics["mitigated"] = metrics_json(*r.metrics.mitigated);
    j["metrics"] = std::move(metrics);
    return j;
}

/// Read-side view of a JSON value that knows its own path.
class Field {
public:
    Field(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

    const json& value() const noexcept { return value_; }
    const std::string& path() const noexcept { return path_; }

    [[noreturn]] void fail(const std::string& message) const { throw ResultFormatError(path_, message); }

    bool has(const std::string& key) const { return value_.is_object() && value_.contains(key); }

    Field operator[](const std::string& key) const {
        if (!value_.is_object()) fail("expected an object");
        const auto it = value_.find(key);
        if (it == value_.end()) throw ResultFormatError(path_ + "." + key, "missing field");
        return {*it, path_ + "." + key};
    }

    Field operator[](std::size_t index) const {
        if (!value_.is_array()) fail("expected an array");
        if (index >= value_.size()) fail("index out of range");
        return {value_[index], path_ + "[" + std::to_string(index) + "]"};
    }

    std::size_t size() const {
        if (!value_.is_array()) fail("expected an array");
        return value_.size();
    }

    double number() const {
        if (!value_.is_number()) fail("expected a number");
        return value_.get<double>();
    }

    std::uint64_t count() const {
        if (!value_.is_number_unsigned() && !(value_.is_number_integer() && value_.get<std::int64_t>() >= 0)) {
            fail("expected a non-negative integer");
        }
        return value_.get<std::uint64_t>();
    }

    bool boolean() const {
        if (!value_.is_boolean()) fail("expected true or false");
        return value_.get<bool>();
    }

    std::string string() const {
        if (!value_.is_string()) fail("expected a string");
        return value_.get<std::string>();
    }

    std::vector<double> numbers() const {
        std::vector<double> out;
        for (std::size_t i = 0; i < size(); ++i) out.push_back((*this)[i].number());
        return out;
    }

private:
    const json& value_;
    std::string path_;
};

inline InverseMode read_mode(const Field& f) {
    const auto name = f.string();
    const auto mode = parse_inverse_mode(name);
    if (!mode) f.fail("unknown strategy '" + name + "'");
    return *mode;
}

inline Matching read_pairs(const Field& f, const CouplingGraph& graph) {
    std::vector<QubitPair> pairs;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto p = f[i];
        if (p.size() != 2) p.fail("expected a [qubit, qubit] pair");
        pairs.emplace_back(p[0].count(), p[1].count());
    }
    try {
        return Matching::from_pairs(graph, std::move(pairs));
    } catch (const TopologyError& ex) {
        f.fail(ex.what());
    }
}

inline MetricSet read_metrics(const Field& f) { return {f["fuzz"].number(), f["success"].number(), f["diff"].number()}; }

inline SampleRound read_sample_round(const Field& f, const CouplingGraph& graph) {
    SampleRound r;
    r.round_index = f["round"].count();
    r.entangling.matching = read_pairs(f["entangling"]["pairs"], graph);
    r.entangling.angles = f["entangling"]["angles"].numbers();
    if (r.entangling.angles.size() != r.entangling.matching.pairs.size()) {
        f["entangling"]["angles"].fail("one angle per pair required");
    }
    if (f.has("inverse")) {
        const auto inv = f["inverse"];
        InverseSlice s;
        s.mode = read_mode(inv["mode"]);
        s.assumed_matching = read_pairs(inv["pairs"], graph);
        s.assumed_angles = inv["angles"].numbers();
        if (s.assumed_angles.size() != s.assumed_matching.pairs.size()) inv["angles"].fail("one angle per pair required");
        r.inverse = std::move(s);
    }
    if (f.has("conjugation")) {
        const auto c = f["conjugation"];
        ConjugationLayer layer;
        for (std::size_t i = 0; i < c.size(); ++i) {
            const auto axis = c[i]["axis"].string();
            if (axis != "x" && axis != "y") c[i]["axis"].fail("expected \"x\" or \"y\"");
            layer.rotations.push_back({axis == "x" ? Axis::X : Axis::Y, c[i]["phi"].number()});
        }
        r.conjugation = std::move(layer);
    }
    r.p_tilde = f["p_tilde"].numbers();
    r.theta_tilde = f["theta_tilde"].numbers();
    if (r.p_tilde.size() != graph.num_qubits()) f["p_tilde"].fail("one value per qubit required");
    if (r.theta_tilde.size() != graph.num_qubits()) f["theta_tilde"].fail("one value per qubit required");
    if (f.has("p_bar")) r.p_bar = f["p_bar"].numbers();
    const auto m = f["metrics"];
    if (m.has("raw")) r.metrics.raw = read_metrics(m["raw"]);
    if (m.has("mitigated")) r.metrics.mitigated = read_metrics(m["mitigated"]);
    return r;
}

inline const std::set<std::string>& known_top_level() {
    static const std::set<std::string> keys = {"schema", "generator", "bit_order", "timestamp",
                                               "spec",   "device",    "series",    "samples"};
    return keys;
}

inline const std::set<std::string>& known_spec_fields() {
    static const std::set<std::string> keys = {"device",     "strategies", "rounds", "shots",
                                               "exact",      "samples",    "noise",  "seed",
                                               "mitigation", "full",       "random_stat_noise_sign"};
    return keys;
}

}  // namespace detail

inline nlohmann::json spec_to_json(const CampaignSpec& spec) {
    nlohmann::json strategies = nlohmann::json::array();
    for (auto s : spec.strategies) strategies.push_back(to_string(s));
    nlohmann::json j = {{"device", spec.device},
                        {"strategies", std::move(strategies)},
                        {"rounds", spec.rounds},
                        {"exact", !spec.shots.has_value()},
                        {"samples", spec.samples},
                        {"noise", {{"p1", spec.noise.p1}, {"p2", spec.noise.p2}, {"readout", spec.noise.readout}}},
                        {"seed", spec.seed},
                        {"mitigation", to_string(spec.mitigation)},
                        {"full", spec.full},
                        {"random_stat_noise_sign", spec.random_stat_noise_sign}};
    j["shots"] = spec.shots ? nlohmann::json(*spec.shots) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json result_to_json(const CampaignResult& result) {
    using nlohmann::json;
    json j = result.extras.is_object() ? result.extras : json::object();
    j["schema"] = kResultSchema;
    j["generator"] = "qab";
    j["bit_order"] = kBitOrderNote;
    j["timestamp"] = result.timestamp;
    json spec = result.spec_extras.is_object() ? result.spec_extras : json::object();
    spec.update(spec_to_json(result.spec));
    j["spec"] = std::move(spec);
    if (result.graph) j["device"] = graph_to_json(*result.graph);
    json series = json::object();
    for (const auto& [strategy, metrics] : result.series) {
        for (const auto& [metric, stats] : metrics) series[strategy][metric] = {{"mean", stats.mean}, {"std", stats.std}};
    }
    j["series"] = std::move(series);
    if (!result.samples.empty()) {
        json samples = json::array();
        for (const auto& run : result.samples) {
            json rounds = json::array();
            for (const auto& r : run.rounds) rounds.push_back(detail::sample_round_json(r));
            samples.push_back(
                {{"strategy", to_string(run.strategy)}, {"sample", run.sample}, {"seed", run.seed}, {"rounds", rounds}});
        }
        j["samples"] = std::move(samples);
    }
    return j;
}

inline CampaignResult result_from_json(const nlohmann::json& doc) {
    using detail::Field;
    const Field root(doc, "$");
    if (!doc.is_object()) root.fail("expected an object");
    const auto schema = root["schema"].count();
    if (schema != static_cast<std::uint64_t>(kResultSchema)) {
        root["schema"].fail("unsupported schema " + std::to_string(schema));
    }

    CampaignResult result;
    for (const auto& [key, value] : doc.items()) {
        if (!detail::known_top_level().contains(key)) result.extras[key] = value;
    }
    if (root.has("timestamp")) result.timestamp = root["timestamp"].string();

    const auto spec = root["spec"];
    auto& s = result.spec;
    s.device = spec["device"].string();
    for (std::size_t i = 0; i < spec["strategies"].size(); ++i) {
        s.strategies.push_back(detail::read_mode(spec["strategies"][i]));
    }
    s.rounds = spec["rounds"].count();
    if (!spec["exact"].boolean()) s.shots = spec["shots"].count();
    s.samples = spec["samples"].count();
    s.noise = {spec["noise"]["p1"].number(), spec["noise"]["p2"].number(), spec["noise"]["readout"].number()};
    s.seed = spec["seed"].count();
    const auto mitigation = parse_mitigation(spec["mitigation"].string());
    if (!mitigation) spec["mitigation"].fail("expected off, on or both");
    s.mitigation = *mitigation;
    s.full = spec["full"].boolean();
    if (spec.has("random_stat_noise_sign")) s.random_stat_noise_sign = spec["random_stat_noise_sign"].boolean();
    for (const auto& [key, value] : spec.value().items()) {
        if (!detail::known_spec_fields().contains(key)) result.spec_extras[key] = value;
    }

    if (root.has("device")) {
        try {
            result.graph = graph_from_json(doc.at("device"));
        } catch (const TopologyError& ex) {
            root["device"].fail(ex.what());
        }
    }

    const auto series = root["series"];
    if (!series.value().is_object()) series.fail("expected an object");
    for (const auto& [strategy, metrics] : series.value().items()) {
        const Field sf = series[strategy];
        if (!metrics.is_object()) sf.fail("expected an object");
        for (const auto& [metric, _] : metrics.items()) {
            const Field mf = sf[metric];
            SeriesStats stats{mf["mean"].numbers(), mf["std"].numbers()};
            if (stats.mean.size() != s.rounds) mf["mean"].fail("expected one value per round");
            if (stats.std.size() != s.rounds) mf["std"].fail("expected one value per round");
            result.series[strategy][metric] = std::move(stats);
        }
    }

    if (root.has("samples")) {
        const auto samples = root["samples"];
        if (!result.graph) root.fail("samples require the device field");
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto f = samples[i];
            SampleRun run;
            run.strategy = detail::read_mode(f["strategy"]);
            run.sample = f["sample"].count();
            run.seed = f["seed"].count();
            const auto rounds = f["rounds"];
            for (std::size_t r = 0; r < rounds.size(); ++r) {
                run.rounds.push_back(detail::read_sample_round(rounds[r], *result.graph));
            }
            result.samples.push_back(std::move(run));
        }
    }
    return result;
}

/// Serialized results file contents; deterministic for a given result.
inline std::string result_to_string(const CampaignResult& result) { return result_to_json(result).dump(1) + "\n"; }

inline void write_result(const CampaignResult& result, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << result_to_string(result);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline CampaignResult parse_result(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& ex) {
        throw ResultFormatError("$", std::string("not valid JSON: ") + ex.what());
    }
    return result_from_json(doc);
}

inline CampaignResult read_result(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_result(buf.str());
}

}  // namespace qab

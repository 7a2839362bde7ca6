#pragma once

// HTTP/JSON front end of GameService.
//
//   POST /games                 {device, shots?, noise?, seed?}  -> 201 {id, puzzle}
//   POST /games/{id}/pairing    {"pairs": ["a", "c"]}            -> {puzzle, feedback, finished}
//   GET  /games/{id}                                              -> session state
//   GET  /devices                                                 -> catalog
//
// Errors are {"error": message} (plus "label" for a rejected pairing).

#include <string>

#include <httplib.h>
#include <json.hpp>

#include "game.hpp"

namespace qab {

namespace detail {

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
}

inline void send_error(httplib::Response& res, int status, const std::string& message,
                       const std::optional<std::string>& label = std::nullopt) {
    nlohmann::json body = {{"error", message}};
    if (label) body["label"] = *label;
    send_json(res, status, body);
}

inline nlohmann::json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    try {
        return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error&) {
        throw GameError(400, "request body is not valid JSON");
    }
}

inline NewGame new_game_from_json(const nlohmann::json& body) {
    if (!body.is_object()) throw GameError(400, "expected a JSON object");
    NewGame g;
    if (body.contains("device")) {
        if (!body["device"].is_string()) throw GameError(400, "'device' must be a string");
        g.device = body["device"].get<std::string>();
    }
    if (body.contains("shots")) {
        const auto& s = body["shots"];
        if (s.is_null()) {
            g.shots = std::optional<std::uint64_t>{};
        } else if (s.is_number_unsigned() && s.get<std::uint64_t>() >= 1) {
            g.shots = std::optional<std::uint64_t>{s.get<std::uint64_t>()};
        } else {
            throw GameError(400, "'shots' must be a positive integer or null for exact mode");
        }
    }
    if (body.contains("noise")) {
        const auto& n = body["noise"];
        if (!n.is_object()) throw GameError(400, "'noise' must be an object {p1, p2, readout}");
        NoiseModel m{0, 0, 0};
        for (auto [key, field] : {std::pair{"p1", &m.p1}, std::pair{"p2", &m.p2}, std::pair{"readout", &m.readout}}) {
            if (!n.contains(key)) continue;
            if (!n[key].is_number()) throw GameError(400, std::string("noise.") + key + " must be a number");
            *field = n[key].get<double>();
        }
        g.noise = m;
    }
    if (body.contains("seed")) {
        if (!body["seed"].is_number_unsigned()) throw GameError(400, "'seed' must be a non-negative integer");
        g.seed = body["seed"].get<std::uint64_t>();
    }
    return g;
}

inline std::vector<std::string> labels_from_json(const nlohmann::json& body) {
    if (!body.is_object() || !body.contains("pairs") || !body["pairs"].is_array()) {
        throw GameError(400, "expected {\"pairs\": [edge labels]}");
    }
    std::vector<std::string> labels;
    for (const auto& x : body["pairs"]) {
        if (!x.is_string()) throw GameError(400, "edge labels must be strings");
        labels.push_back(x.get<std::string>());
    }
    return labels;
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
    try {
        f();
    } catch (const GameError& ex) {
        send_error(res, ex.status(), ex.what(), ex.label());
    } catch (const std::exception& ex) {
        send_error(res, 500, ex.what());
    }
}

}  // namespace detail

/// Registers the game routes on `server`. `service` must outlive it.
inline void install_game_routes(httplib::Server& server, GameService& service) {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) detail::send_error(res, res.status, res.status == 404 ? "no such route" : "request failed");
    });
    server.Get("/devices", [&service](const httplib::Request&, httplib::Response& res) {
        detail::guarded(res, [&] { detail::send_json(res, 200, service.devices()); });
    });
    server.Post("/games", [&service](const httplib::Request& req, httplib::Response& res) {
        detail::guarded(res, [&] {
            const auto game = detail::new_game_from_json(detail::parse_body(req));
            detail::send_json(res, 201, service.create_game(game));
        });
    });
    server.Get("/games/:id", [&service](const httplib::Request& req, httplib::Response& res) {
        detail::guarded(res, [&] { detail::send_json(res, 200, service.get_state(req.path_params.at("id"))); });
    });
    server.Post("/games/:id/pairing", [&service](const httplib::Request& req, httplib::Response& res) {
        detail::guarded(res, [&] {
            const auto labels = detail::labels_from_json(detail::parse_body(req));
            detail::send_json(res, 200, service.submit_pairing(req.path_params.at("id"), labels));
        });
    });
}

}  // namespace qab

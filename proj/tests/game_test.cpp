#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <qab/game_server.hpp>
#include <qab/results_io.hpp>

namespace qab {
namespace {

using nlohmann::json;

NewGame exact_game(const std::string& device, std::uint64_t seed) {
    NewGame g;
    g.device = device;
    g.shots = std::optional<std::uint64_t>{};
    g.noise = NoiseModel{0, 0, 0};
    g.seed = seed;
    return g;
}

std::vector<std::string> labels_of(const CouplingGraph& g, const Matching& m) {
    std::vector<std::string> out;
    for (const auto& p : m.pairs) out.push_back(g.labels()[*g.edge_index(p)]);
    return out;
}

// A disjoint set of edges none of which is a true pair.
std::vector<std::string> wrong_labels(const CouplingGraph& g, const Matching& truth) {
    std::vector<std::string> out;
    std::set<Qubit> used;
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
        const auto e = g.edges()[i];
        if (std::binary_search(truth.pairs.begin(), truth.pairs.end(), e)) continue;
        if (used.contains(e.first) || used.contains(e.second)) continue;
        used.insert(e.first);
        used.insert(e.second);
        out.push_back(g.labels()[i]);
    }
    return out;
}

std::vector<int> percents(const json& puzzle) {
    std::vector<int> out;
    for (const auto& n : puzzle["nodes"]) out.push_back(n["percent"].get<int>());
    return out;
}

TEST(Puzzle, PercentAndColor) {
    EXPECT_EQ(angle_percent(0.0), 0);
    EXPECT_EQ(angle_percent(std::numbers::pi / 4), 50);
    EXPECT_EQ(angle_percent(std::numbers::pi / 2), 100);
    EXPECT_EQ(angle_percent(0.005 * std::numbers::pi / 2), 1);  // half rounds away from zero
    EXPECT_EQ(percent_color(0), (Rgb{0, 0, 255}));
    EXPECT_EQ(percent_color(100), (Rgb{255, 0, 0}));
    EXPECT_EQ(percent_color(50), (Rgb{128, 0, 127}));
    EXPECT_EQ(hex_color(percent_color(100)), "#ff0000");
    for (int p = 0; p <= 100; ++p) {
        const auto c = percent_color(p);
        EXPECT_EQ(c.r + c.b, 255);
    }
}

TEST(Puzzle, LabelsResolveAndReject) {
    const auto g = line_graph(5);
    EXPECT_EQ(pairing_from_labels(g, {"a", "c"}).pairs, (std::vector<QubitPair>{{0, 1}, {2, 3}}));
    EXPECT_TRUE(pairing_from_labels(g, {}).pairs.empty());
    try {
        pairing_from_labels(g, {"a", "b"});
        FAIL();
    } catch (const GameError& ex) {
        EXPECT_EQ(ex.status(), 422);
        EXPECT_EQ(ex.label(), "b");
    }
    try {
        pairing_from_labels(g, {"zz"});
        FAIL();
    } catch (const GameError& ex) {
        EXPECT_EQ(ex.status(), 422);
        EXPECT_EQ(ex.label(), "zz");
    }
}

TEST(GameService, TwoQubitGameShowsEqualPercents) {
    GameService svc;
    const auto g = svc.create_game(exact_game("line_2", 3));
    const auto pct = percents(g["puzzle"]);
    EXPECT_EQ(pct[0], pct[1]);
    EXPECT_EQ(g["puzzle"]["round"], 1);
    EXPECT_EQ(g["puzzle"]["edges"][0]["label"], "a");
}

TEST(GameService, UnpairedQubitShowsZero) {
    GameService svc;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto g = svc.create_game(exact_game("line_3", seed));
        const auto id = g["id"].get<std::string>();
        const auto rec = svc.transcript(id).front();
        ASSERT_EQ(rec.entangling.matching.unpaired.size(), 1u);
        EXPECT_EQ(percents(g["puzzle"])[rec.entangling.matching.unpaired[0]], 0);
    }
}

TEST(GameService, StateAndErrors) {
    GameService svc;
    const auto g = svc.create_game(exact_game("ladder_4", 1));
    const auto id = g["id"].get<std::string>();
    auto state = svc.get_state(id);
    EXPECT_EQ(state["round"], 1);
    EXPECT_TRUE(state["scores"].empty());
    for (int i = 0; i < 3; ++i) svc.submit_pairing(id, {});
    state = svc.get_state(id);
    EXPECT_EQ(state["scores"].size(), 3u);
    EXPECT_EQ(state["round"], 4);
    EXPECT_EQ(state["puzzles"].size(), 4u);

    try {
        svc.get_state("nope");
        FAIL();
    } catch (const GameError& ex) {
        EXPECT_EQ(ex.status(), 404);
    }
    try {
        svc.create_game(exact_game("heavyhex_7", 1));
        FAIL();
    } catch (const GameError& ex) {
        EXPECT_EQ(ex.status(), 404);
    }
    try {
        svc.submit_pairing(id, {"a", "a"});
        FAIL();
    } catch (const GameError& ex) {
        EXPECT_EQ(ex.status(), 422);
    }
    // A rejected submission does not advance the game.
    EXPECT_EQ(svc.get_state(id)["round"], 4);
}

TEST(GameService, IdleSessionsExpireWith410) {
    auto now = std::chrono::steady_clock::time_point{};
    GameConfig cfg;
    cfg.idle_timeout = std::chrono::seconds(60);
    GameService svc(Catalog(), cfg, [&] { return now; });
    const auto id = svc.create_game(exact_game("line_4", 1))["id"].get<std::string>();
    now += std::chrono::seconds(30);
    EXPECT_NO_THROW(svc.get_state(id));
    now += std::chrono::seconds(61);
    try {
        svc.submit_pairing(id, {});
        FAIL();
    } catch (const GameError& ex) {
        EXPECT_EQ(ex.status(), 410);
    }
    EXPECT_EQ(svc.active_sessions(), 0u);
}

TEST(GameService, ReplayReproducesPuzzles) {
    GameService a, b;
    const auto ga = a.create_game(exact_game("ladder_10", 42));
    const auto gb = b.create_game(exact_game("ladder_10", 42));
    EXPECT_EQ(ga["puzzle"], gb["puzzle"]);
    const std::vector<std::vector<std::string>> moves = {{"a", "c"}, {}, {"b"}, {"e"}};
    for (const auto& m : moves) {
        EXPECT_EQ(a.submit_pairing(ga["id"], m), b.submit_pairing(gb["id"], m));
    }
}

TEST(GameService, PercentsAlwaysInRangeWithNoise) {
    GameService svc;
    NewGame g;
    g.device = "ibmqx5";
    g.shots = std::optional<std::uint64_t>{200};
    g.seed = 9;
    const auto game = svc.create_game(g);
    const auto id = game["id"].get<std::string>();
    json puzzle = game["puzzle"];
    for (int r = 0; r < 4; ++r) {
        for (const auto& n : puzzle["nodes"]) {
            const int p = n["percent"];
            EXPECT_GE(p, 0);
            EXPECT_LE(p, 100);
            const auto c = percent_color(p);
            EXPECT_EQ(n["color"]["r"], c.r);
            EXPECT_EQ(n["color"]["b"], c.b);
        }
        puzzle = svc.submit_pairing(id, {"a"})["puzzle"];
    }
}

// Five rounds on line_5, noiseless exact: the correct pairing keeps pairs at
// identical percentages; a wrong pairing in round 2 raises fuzz afterwards.
TEST(GameLoop, CorrectAndWrongForksOnLineFive) {
    GameService svc;
    const auto g = line_graph(5);
    const auto good = svc.create_game(exact_game("line_5", 2718));
    const auto bad = svc.create_game(exact_game("line_5", 2718));
    const std::string good_id = good["id"], bad_id = bad["id"];
    EXPECT_EQ(good["puzzle"], bad["puzzle"]);

    for (int round = 1; round <= 5; ++round) {
        const auto truth = svc.transcript(good_id).back().entangling.matching;
        const auto pct = percents(svc.get_state(good_id)["puzzles"].back());
        for (const auto& p : truth.pairs) EXPECT_EQ(pct[p.first], pct[p.second]) << "round " << round;
        if (round == 5) break;
        const auto fb = svc.submit_pairing(good_id, labels_of(g, truth));
        EXPECT_EQ(fb["feedback"]["success"], 1.0);

        const auto bad_truth = svc.transcript(bad_id).back().entangling.matching;
        // Both forks share the same entangling slices.
        EXPECT_EQ(bad_truth, truth);
        const auto move = round == 2 ? wrong_labels(g, bad_truth) : labels_of(g, bad_truth);
        const auto bfb = svc.submit_pairing(bad_id, move);
        if (round == 2) EXPECT_LT(bfb["feedback"]["success"].get<double>(), 1.0);
    }
    const auto good_recs = svc.transcript(good_id);
    const auto bad_recs = svc.transcript(bad_id);
    for (std::size_t r = 2; r < 5; ++r) {
        EXPECT_GT(bad_recs[r].metrics.raw->fuzz, good_recs[r].metrics.raw->fuzz) << "round " << r + 1;
        EXPECT_LE(good_recs[r].metrics.raw->fuzz, 1e-12);
    }
}

TEST(GameService, SavedDataMode) {
    CampaignSpec spec;
    spec.device = "ladder_6";
    spec.strategies = {InverseMode::RandomPairs};
    spec.rounds = 3;
    spec.shots = 100;
    spec.samples = 2;
    spec.full = true;
    spec.seed = 4;
    const auto saved = parse_result(result_to_string(run_campaign(spec)));

    GameService svc;
    svc.use_saved_data(saved);
    EXPECT_TRUE(svc.saved_data_mode());
    const auto game = svc.create_game(NewGame{"", {}, {}, 1});
    const auto& rounds = saved.samples[1].rounds;
    EXPECT_EQ(game["puzzle"], puzzle_json(*saved.graph, 1, rounds[0].theta_tilde));
    const auto id = game["id"].get<std::string>();
    for (std::size_t r = 0; r < rounds.size(); ++r) {
        const auto out = svc.submit_pairing(id, labels_of(*saved.graph, rounds[r].entangling.matching));
        EXPECT_EQ(out["feedback"]["success"], 1.0);
        EXPECT_EQ(out["finished"], r + 1 == rounds.size());
    }
    EXPECT_EQ(svc.get_state(id)["mode"], "saved-data");
    try {
        svc.create_game(NewGame{"line_5", {}, {}, 1});
        FAIL();
    } catch (const GameError& ex) {
        EXPECT_EQ(ex.status(), 404);
    }

    auto without_samples = saved;
    without_samples.samples.clear();
    EXPECT_THROW(GameService().use_saved_data(without_samples), GameError);
}

class HttpGame : public ::testing::Test {
protected:
    GameService service;
    httplib::Server server;
    std::thread thread;
    int port = 0;

    void SetUp() override {
        install_game_routes(server, service);
        port = server.bind_to_any_port("127.0.0.1");
        ASSERT_GT(port, 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    void TearDown() override {
        server.stop();
        thread.join();
    }

    httplib::Client client() { return httplib::Client("127.0.0.1", port); }

    static json body(const httplib::Result& r) { return json::parse(r->body); }
};

TEST_F(HttpGame, FullRoundTrip) {
    auto cli = client();
    auto devices = cli.Get("/devices");
    ASSERT_TRUE(devices);
    EXPECT_EQ(devices->status, 200);
    bool found = false;
    const auto catalog = body(devices);
    for (const auto& d : catalog["devices"]) {
        if (d["name"] == "ibmqx4") {
            found = true;
            EXPECT_TRUE(d.contains("layout"));
            EXPECT_EQ(d["edges"].size(), 6u);
        }
    }
    EXPECT_TRUE(found);

    auto created = cli.Post("/games", R"({"device": "line_5", "shots": null, "noise": {"p1": 0, "p2": 0, "readout": 0}, "seed": 5})",
                            "application/json");
    ASSERT_TRUE(created);
    EXPECT_EQ(created->status, 201);
    const auto game = body(created);
    const std::string id = game["id"];
    EXPECT_EQ(game["puzzle"]["nodes"].size(), 5u);

    auto moved = cli.Post("/games/" + id + "/pairing", R"({"pairs": ["a", "c"]})", "application/json");
    ASSERT_TRUE(moved);
    EXPECT_EQ(moved->status, 200);
    const auto mb = body(moved);
    EXPECT_EQ(mb["feedback"]["round"], 1);
    EXPECT_EQ(mb["puzzle"]["round"], 2);

    auto state = cli.Get("/games/" + id);
    ASSERT_TRUE(state);
    EXPECT_EQ(state->status, 200);
    EXPECT_EQ(body(state)["scores"].size(), 1u);
    EXPECT_EQ(state->get_header_value("Access-Control-Allow-Origin"), "*");
}

TEST_F(HttpGame, ErrorStatuses) {
    auto cli = client();
    auto r = cli.Post("/games", R"({"device": "nonesuch"})", "application/json");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 404);
    EXPECT_TRUE(body(r).contains("error"));

    r = cli.Post("/games", "{not json", "application/json");
    EXPECT_EQ(r->status, 400);
    r = cli.Post("/games", R"({"device": "line_5", "shots": 0})", "application/json");
    EXPECT_EQ(r->status, 400);

    r = cli.Get("/games/unknown");
    EXPECT_EQ(r->status, 404);
    EXPECT_TRUE(body(r).contains("error"));

    const std::string id = body(cli.Post("/games", R"({"device": "line_5", "seed": 1})", "application/json"))["id"];
    r = cli.Post("/games/" + id + "/pairing", R"({"pairs": ["a", "b"]})", "application/json");
    EXPECT_EQ(r->status, 422);
    EXPECT_EQ(body(r)["label"], "b");
    r = cli.Post("/games/" + id + "/pairing", R"({"pairs": ["q"]})", "application/json");
    EXPECT_EQ(r->status, 422);
    EXPECT_EQ(body(r)["label"], "q");
    r = cli.Post("/games/" + id + "/pairing", R"({"pears": []})", "application/json");
    EXPECT_EQ(r->status, 400);

    r = cli.Get("/no/such/route");
    EXPECT_EQ(r->status, 404);
    EXPECT_TRUE(body(r).contains("error"));
}

TEST_F(HttpGame, OverlappingSubmissionGets409) {
    // A large exact-mode game makes each submission slow enough to overlap.
    const std::string id =
        body(client().Post("/games", R"({"device": "complete_19", "shots": null, "seed": 3})", "application/json"))["id"];
    std::atomic<int> conflicts{0}, ok{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < 4; ++i) {
        threads.emplace_back([&] {
            auto cli = client();
            auto r = cli.Post("/games/" + id + "/pairing", R"({"pairs": []})", "application/json");
            if (r && r->status == 409) ++conflicts;
            if (r && r->status == 200) ++ok;
        });
    }
    for (auto& t : threads) t.join();
    EXPECT_GE(ok.load(), 1);
    EXPECT_EQ(ok.load() + conflicts.load(), 4);
    EXPECT_EQ(body(client().Get("/games/" + id))["scores"].size(), static_cast<std::size_t>(ok.load()));
}

}  // namespace
}  // namespace qab

#pragma once

// qab command line: devices, run, plot, game serve.

#include <csignal>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <qab/campaign.hpp>
#include <qab/game_server.hpp>
#include <qab/plot.hpp>
#include <qab/results_io.hpp>

namespace qab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Bad flag values found after parsing; reported like parse errors.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    if (!text.empty() && text.back() == ',') out.emplace_back();
    return out;
}

/// "typical", "none", or "p1,p2,readout".
inline NoiseModel parse_noise(const std::string& text) {
    if (text == "typical") return NoiseModel::typical();
    if (text == "none") return {0, 0, 0};
    const auto parts = split_commas(text);
    if (parts.size() != 3) throw UsageError("--noise expects p1,p2,readout, 'typical' or 'none', got '" + text + "'");
    NoiseModel m;
    double* fields[] = {&m.p1, &m.p2, &m.readout};
    for (std::size_t i = 0; i < 3; ++i) {
        std::size_t used = 0;
        try {
            *fields[i] = std::stod(parts[i], &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != parts[i].size()) throw UsageError("--noise: '" + parts[i] + "' is not a number");
    }
    try {
        m.validate();
    } catch (const SimulationError& ex) {
        throw UsageError(std::string("--noise: ") + ex.what());
    }
    return m;
}

inline std::vector<InverseMode> parse_strategies(const std::vector<std::string>& items) {
    std::vector<InverseMode> out;
    for (const auto& item : items) {
        for (const auto& name : split_commas(item)) {
            const auto mode = parse_inverse_mode(name);
            if (!mode || *mode == InverseMode::PlayerPairs) {
                throw UsageError("unknown strategy '" + name +
                                 "' (expected true-pairs, random-pairs, mwpm-pairs or emulated-stat-noise)");
            }
            out.push_back(*mode);
        }
    }
    return out;
}

inline void require_device(const Catalog& catalog, const std::string& name) {
    if (!catalog.contains(name)) throw UsageError("unknown device '" + name + "' (see `qab devices list`)");
}

inline void require_parent_dir(const std::filesystem::path& path, const std::string& flag) {
    const auto parent = path.parent_path();
    if (!parent.empty() && !std::filesystem::is_directory(parent)) {
        throw UsageError(flag + ": directory " + parent.string() + " does not exist");
    }
}

inline Catalog load_catalog(const std::string& dir) {
    try {
        return dir.empty() ? Catalog() : Catalog(dir);
    } catch (const TopologyError& ex) {
        throw UsageError(std::string("--devices-dir: ") + ex.what());
    }
}

namespace detail {
inline httplib::Server* active_server = nullptr;
extern "C" inline void stop_server(int) {
    if (active_server != nullptr) active_server->stop();
}
}  // namespace detail

/// Runs the tool. Output goes to `out`, diagnostics to `err`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Pairing-recovery benchmark toolkit", "qab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "qab 0.1.0");

    std::string devices_dir;
    app.add_option("--devices-dir", devices_dir, "Directory of device JSON files")
        ->envname("QAB_DEVICES_DIR")
        ->check(CLI::ExistingDirectory);

    // devices
    auto* devices = app.add_subcommand("devices", "List or show coupling graphs");
    devices->require_subcommand(1);
    auto* devices_list = devices->add_subcommand("list", "List device names");
    auto* devices_show = devices->add_subcommand("show", "Print a device as JSON");
    std::string show_name;
    devices_show->add_option("name", show_name, "Device name")->required();

    // run
    auto* run = app.add_subcommand("run", "Run a benchmark campaign and write a results file");
    std::string device, out_file, noise_text = "none", mitigation_text;
    std::vector<std::string> strategy_items;
    std::size_t rounds = 0, samples = 100, jobs = 0;
    std::uint64_t shots = 0, seed = 0;
    bool exact = false, mitigate = false, full = false, random_sign = false;
    run->add_option("--device", device, "Device name")->required()->envname("QAB_DEVICE");
    run->add_option("--strategy", strategy_items, "Strategies, comma separated")
        ->required()
        ->envname("QAB_STRATEGY")
        ->delimiter(',');
    run->add_option("--rounds", rounds, "Rounds per sample")->required()->envname("QAB_ROUNDS")->check(CLI::PositiveNumber);
    auto* shots_opt = run->add_option("--shots", shots, "Shots per circuit")->envname("QAB_SHOTS")->check(CLI::PositiveNumber);
    auto* exact_opt = run->add_flag("--exact", exact, "Exact outcome probabilities instead of shots")->envname("QAB_EXACT");
    shots_opt->excludes(exact_opt);
    run->add_option("--samples", samples, "Samples per strategy")->envname("QAB_SAMPLES")->check(CLI::PositiveNumber);
    run->add_option("--seed", seed, "Campaign seed")->envname("QAB_SEED");
    run->add_option("--noise", noise_text, "p1,p2,readout | typical | none")->envname("QAB_NOISE");
    auto* mitigate_opt = run->add_flag("--mitigate", mitigate, "Report raw and mitigated metrics");
    run->add_option("--mitigation", mitigation_text, "off | on | both")->envname("QAB_MITIGATION")->excludes(mitigate_opt);
    run->add_option("--out", out_file, "Results file")->required()->envname("QAB_OUT");
    run->add_flag("--full", full, "Keep per-sample round records")->envname("QAB_FULL");
    run->add_option("--jobs", jobs, "Worker threads (0 = all cores)")->envname("QAB_JOBS");
    run->add_flag("--stat-noise-random-sign", random_sign, "Random sign for emulated statistical noise");

    // plot
    auto* plot = app.add_subcommand("plot", "Render a metric of a results file as SVG");
    std::string plot_in, plot_metric, plot_out;
    plot->add_option("--in", plot_in, "Results file")->required()->check(CLI::ExistingFile);
    plot->add_option("--metric", plot_metric, "fuzz, success, diff or a *_mitigated variant")->required();
    plot->add_option("--out", plot_out, "SVG file")->required();

    // game serve
    auto* game = app.add_subcommand("game", "Game service");
    game->require_subcommand(1);
    auto* serve = game->add_subcommand("serve", "Serve the game HTTP API");
    std::string game_device, game_noise = "typical", game_host = "127.0.0.1", saved_file;
    int port = 8080;
    std::uint64_t game_shots = 1000;
    bool game_exact = false;
    serve->add_option("--device", game_device, "Device used when a new game names none")
        ->required()
        ->envname("QAB_GAME_DEVICE");
    serve->add_option("--port", port, "TCP port")->envname("QAB_PORT")->check(CLI::Range(0, 65535));
    serve->add_option("--host", game_host, "Bind address")->envname("QAB_HOST");
    serve->add_option("--noise", game_noise, "p1,p2,readout | typical | none")->envname("QAB_GAME_NOISE");
    auto* game_shots_opt =
        serve->add_option("--shots", game_shots, "Default shots per circuit")->envname("QAB_GAME_SHOTS")->check(CLI::PositiveNumber);
    serve->add_flag("--exact", game_exact, "Default to exact probabilities")->excludes(game_shots_opt);
    serve->add_option("--saved", saved_file, "Replay a --full results file")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        std::ostringstream o, e;
        const int code = app.exit(ex, o, e);
        out << o.str();
        err << e.str();
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const Catalog catalog = load_catalog(devices_dir);

        if (*devices_list) {
            for (const auto& name : catalog.names()) {
                const auto g = catalog.device(name);
                out << std::left << std::setw(14) << name << ' ' << std::right << std::setw(3) << g.num_qubits()
                    << " qubits " << std::setw(3) << g.edges().size() << " edges\n";
            }
            return kExitOk;
        }
        if (*devices_show) {
            require_device(catalog, show_name);
            out << catalog.document(show_name).dump(2) << '\n';
            return kExitOk;
        }

        if (*run) {
            CampaignSpec spec;
            spec.device = device;
            spec.strategies = parse_strategies(strategy_items);
            spec.rounds = rounds;
            if (exact) {
                spec.shots.reset();
            } else if (shots_opt->count() > 0) {
                spec.shots = shots;
            } else {
                throw UsageError("one of --shots N or --exact is required");
            }
            spec.samples = samples;
            spec.seed = seed;
            spec.noise = parse_noise(noise_text);
            if (mitigate) {
                spec.mitigation = Mitigation::Both;
            } else if (!mitigation_text.empty()) {
                const auto m = parse_mitigation(mitigation_text);
                if (!m) throw UsageError("--mitigation expects off, on or both");
                spec.mitigation = *m;
            }
            spec.full = full;
            spec.jobs = jobs;
            spec.random_stat_noise_sign = random_sign;
            require_device(catalog, device);
            try {
                spec.validate();
            } catch (const CampaignError& ex) {
                throw UsageError(ex.what());
            }
            require_parent_dir(out_file, "--out");

            auto result = run_campaign(spec, catalog);
            result.timestamp = utc_timestamp();
            write_result(result, out_file);
            err << "wrote " << out_file << " (" << spec.strategies.size() << " strategies, " << spec.samples
                << " samples, " << spec.rounds << " rounds)\n";
            return kExitOk;
        }

        if (*plot) {
            require_parent_dir(plot_out, "--out");
            const auto result = read_result(plot_in);
            bool known = false;
            for (const auto& [_, metrics] : result.series) known = known || metrics.contains(plot_metric);
            if (!known) throw UsageError("metric '" + plot_metric + "' is not in " + plot_in);
            render_plot(result, plot_metric, plot_out);
            return kExitOk;
        }

        if (*serve) {
            GameConfig config;
            if (game_exact) {
                config.shots.reset();
            } else {
                config.shots = game_shots;
            }
            config.noise = parse_noise(game_noise);
            require_device(catalog, game_device);
            config.default_device = game_device;
            GameService service(catalog, config);
            if (!saved_file.empty()) {
                auto saved = read_result(saved_file);
                if (saved.graph && saved.graph->name() != game_device) {
                    throw UsageError("--saved holds device " + saved.graph->name() + ", not " + game_device);
                }
                try {
                    service.use_saved_data(std::move(saved));
                } catch (const GameError& ex) {
                    throw UsageError(std::string("--saved: ") + ex.what());
                }
            }
            httplib::Server server;
            install_game_routes(server, service);
            if (!server.bind_to_port(game_host, port)) {
                err << "qab: cannot bind " << game_host << ':' << port << '\n';
                return kExitRuntime;
            }
            detail::active_server = &server;
            std::signal(SIGINT, detail::stop_server);
            std::signal(SIGTERM, detail::stop_server);
            err << "serving on http://" << game_host << ':' << port
                << (service.saved_data_mode() ? " (saved data)" : "") << '\n';
            server.listen_after_bind();
            detail::active_server = nullptr;
            return kExitOk;
        }
    } catch (const UsageError& ex) {
        err << "qab: " << ex.what() << "\nRun with --help for more information.\n";
        return kExitUsage;
    } catch (const ResultFormatError& ex) {
        err << "qab: " << ex.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& ex) {
        err << "qab: " << ex.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace qab::cli

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "twincity/harness.hpp"

namespace twincity::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + salt * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const ExperimentConfig& config,
                    const std::vector<std::string>& outputs) {
    json m;
    m["command"] = command;
    m["config"] = json::parse(config.to_json_text());
    m["outputs"] = outputs;
    write_file(out_dir / "run_manifest.json", m.dump(2) + "\n");
}

}  // namespace

TrainSessionResult run_training_session(const ExperimentConfig& config,
                                        const fs::path& out_dir,
                                        const std::optional<fs::path>& resume) {
    config.validate();
    fs::create_directories(out_dir);
    const std::uint64_t seed = config.seeds.front();
    const int episodes = config.train.episodes;
    const int n = config.n_publishers;
    if (n < 1) {
        throw std::invalid_argument("train: n_publishers must be >= 1");
    }

    std::ofstream trace_stream;
    if (config.trace) {
        trace_stream.open(out_dir / "trace.log", std::ios::binary);
    }

    sched::EnvConfig env_cfg;
    env_cfg.d_threshold_ms = config.d_threshold_ms;
    env_cfg.lambda = config.lambda;
    env_cfg.dt_min_minutes = config.dt_min.minutes;
    auto builder = [config, seed, trace = config.trace ? &trace_stream : nullptr]() {
        auto net = build_network(config, config.scenario, config.n_publishers, seed, 1,
                                 DeviceState::Sleep);
        if (trace) {
            net->engine().trace().attach(trace);
        }
        return net;
    };
    sched::ScheduleEnv env(builder, env_cfg);

    int start_episode = 0;
    std::optional<ddpg::DdpgAgent> agent;
    if (resume) {
        std::ifstream in(*resume);
        if (!in) {
            throw std::runtime_error("train: cannot open checkpoint " + resume->string());
        }
        std::string tag;
        int total = 0;
        in >> tag >> start_episode >> total;
        if (tag != "run") {
            throw std::runtime_error("train: malformed checkpoint header");
        }
        agent = ddpg::DdpgAgent::load(in);
        if (agent->n_devices() != n) {
            throw std::runtime_error("train: checkpoint device count differs from config");
        }
    } else {
        agent = ddpg::DdpgAgent(n, config.ddpg, seed);
    }

    const auto states = sched::whatif_generate(mix(seed, 101), std::max(1, episodes), n);
    std::ostringstream curve;
    curve.precision(12);
    curve << "episode,r_total,r_energy,r_timeliness,r_consecutive,epsilon,critic_loss\n";
    std::ostringstream episode_log;
    episode_log.precision(12);
    episode_log << "seed,episode,r_energy,r_timeliness,r_consecutive,r_total,p95_ms,"
                   "total_consumed_pct\n";

    ddpg::TrainOptions options;
    options.episodes = episodes;
    options.start_episode = start_episode;
    options.initial_state = [&states](int ep) {
        return states[static_cast<std::size_t>(ep) % states.size()];
    };
    const DtMinSchedule dt = config.dt_min;
    options.dt_min_schedule = [dt, episodes](int ep) { return dt.at(ep, episodes); };
    options.on_episode = [&](const ddpg::EpisodeRecord& rec) {
        curve << rec.episode << ',' << rec.r_total << ',' << rec.r_energy << ','
              << rec.r_timeliness << ',' << rec.r_consecutive << ',' << rec.epsilon << ','
              << rec.critic_loss << '\n';
        episode_log << seed << ',' << rec.episode << ',' << rec.r_energy << ','
                    << rec.r_timeliness << ',' << rec.r_consecutive << ',' << rec.r_total
                    << ',' << rec.p95_ms << ',' << rec.consumed_pct << '\n';
    };
    ddpg::train(env, *agent, options);

    write_file(out_dir / "learning_curve.csv", curve.str());
    write_file(out_dir / "episodes.csv", episode_log.str());

    std::ostringstream ckpt;
    ckpt << "run " << episodes << ' ' << episodes << '\n';
    agent->save(ckpt);
    write_file(out_dir / "checkpoint.txt", ckpt.str());

    TrainSessionResult result;
    result.episodes_done = episodes - start_episode;
    result.outputs = {"learning_curve.csv", "episodes.csv", "checkpoint.txt"};
    if (episodes > 0) {
        write_file(out_dir / "overlay_snapshot.txt", env.net().graph().snapshot());
        write_file(out_dir / "stats.txt", env.net().engine().stats().report());
        write_file(out_dir / "energy_report.txt", env.net().ledger().report());
        result.outputs.push_back("overlay_snapshot.txt");
        result.outputs.push_back("stats.txt");
        result.outputs.push_back("energy_report.txt");
    }
    if (config.trace) {
        trace_stream.close();
        result.outputs.push_back("trace.log");
    }
    return result;
}

namespace {

int cmd_train(const ExperimentConfig& config, const fs::path& out_dir,
              const std::optional<fs::path>& resume) {
    const auto result = run_training_session(config, out_dir, resume);
    write_manifest(out_dir, "train", config, result.outputs);
    std::cout << "trained " << result.episodes_done << " episodes; outputs in "
              << out_dir.string() << "\n";
    return 0;
}

int cmd_latency_sweep(const ExperimentConfig& config, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const auto rows = latency_sweep(config);
    write_file(out_dir / "latency_sweep.csv", latency_sweep_csv(rows));
    write_manifest(out_dir, "latency-sweep", config, {"latency_sweep.csv"});
    std::cout << "latency sweep: " << rows.size() << " rows -> "
              << (out_dir / "latency_sweep.csv").string() << "\n";
    return 0;
}

int cmd_energy_sweep(const ExperimentConfig& config, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const auto rows = energy_sweep(config);
    write_file(out_dir / "energy_sweep.csv", energy_sweep_csv(rows));
    write_manifest(out_dir, "energy-sweep", config, {"energy_sweep.csv"});
    std::cout << "energy sweep: " << rows.size() << " rows -> "
              << (out_dir / "energy_sweep.csv").string() << "\n";
    return 0;
}

int cmd_replay(const fs::path& run_dir) {
    const auto manifest_path = run_dir / "run_manifest.json";
    const json manifest = json::parse(read_file(manifest_path));
    const std::string command = manifest.at("command").get<std::string>();
    ExperimentConfig config =
        ExperimentConfig::from_json_text(manifest.at("config").dump());
    const auto outputs = manifest.at("outputs").get<std::vector<std::string>>();

    const fs::path replay_dir = run_dir / "replay_check";
    fs::remove_all(replay_dir);
    config.out_dir = replay_dir.string();
    if (command == "train") {
        run_training_session(config, replay_dir);
    } else if (command == "latency-sweep") {
        fs::create_directories(replay_dir);
        write_file(replay_dir / "latency_sweep.csv", latency_sweep_csv(latency_sweep(config)));
    } else if (command == "energy-sweep") {
        fs::create_directories(replay_dir);
        write_file(replay_dir / "energy_sweep.csv", energy_sweep_csv(energy_sweep(config)));
    } else {
        std::cerr << "replay: unsupported command '" << command << "'\n";
        return 1;
    }

    bool identical = true;
    for (const auto& name : outputs) {
        if (read_file(run_dir / name) != read_file(replay_dir / name)) {
            identical = false;
            std::cout << "DIFFERENT " << name << "\n";
        }
    }
    fs::remove_all(replay_dir);
    if (identical) {
        std::cout << "IDENTICAL\n";
        return 0;
    }
    return 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"twincity: digital-twin IoT network simulator with RTPS-lite pub/sub and a "
                 "DDPG transmission-time scheduler"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::string out_dir_override;
    app.add_option("--config", config_path, "JSON experiment config")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", seed_override, "overrides the config seed list with one seed");
    app.add_option("--out-dir", out_dir_override, "overrides the config output directory");

    auto* train_cmd = app.add_subcommand("train", "train the DDPG scheduler");
    std::optional<int> episodes_override;
    std::string resume_path;
    train_cmd->add_option("--episodes", episodes_override, "overrides train.episodes");
    train_cmd->add_option("--resume", resume_path, "continue from a checkpoint file")
        ->check(CLI::ExistingFile);

    auto* latency_cmd =
        app.add_subcommand("latency-sweep", "p95 latency vs communicated data volume");
    auto* energy_cmd =
        app.add_subcommand("energy-sweep", "energy consumption vs publisher count");

    auto* replay_cmd =
        app.add_subcommand("replay", "re-run a finished run and verify bit-identical outputs");
    std::string run_dir;
    replay_cmd->add_option("run_dir", run_dir, "directory of a finished run")
        ->required()
        ->check(CLI::ExistingDirectory);

    auto* validate_cmd =
        app.add_subcommand("validate-config", "check a config file against the schema");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // unknown subcommand/flag: usage already printed
    }

    try {
        ExperimentConfig config;
        if (!config_path.empty()) {
            config = ExperimentConfig::from_json_file(config_path);
        }
        if (seed_override) {
            config.seeds = {*seed_override};
        }
        if (!out_dir_override.empty()) {
            config.out_dir = out_dir_override;
        }
        if (episodes_override) {
            config.train.episodes = *episodes_override;
        }
        config.validate();
        const fs::path out_dir = config.out_dir;

        if (train_cmd->parsed()) {
            std::optional<fs::path> resume;
            if (!resume_path.empty()) {
                resume = fs::path(resume_path);
            }
            return cmd_train(config, out_dir, resume);
        }
        if (latency_cmd->parsed()) {
            return cmd_latency_sweep(config, out_dir);
        }
        if (energy_cmd->parsed()) {
            return cmd_energy_sweep(config, out_dir);
        }
        if (replay_cmd->parsed()) {
            return cmd_replay(run_dir);
        }
        if (validate_cmd->parsed()) {
            std::cout << "config OK\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return run_cli(args);
}

}  // namespace twincity::harness

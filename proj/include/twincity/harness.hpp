#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "twincity/ddpg.hpp"
#include "twincity/energy.hpp"
#include "twincity/scheduler.hpp"
#include "twincity/simnet.hpp"

namespace twincity::harness {

enum class Scenario { OneService, ThreeService };

enum class PolicyKind { Ddpg, PeriodicSynchronized, UniformRandom, AlwaysActive };

std::string to_string(Scenario s);
std::string to_string(PolicyKind p);
Scenario parse_scenario(const std::string& s);
PolicyKind parse_policy(const std::string& s);

/// Underlay and protocol knobs. The day-scale default heartbeat period
/// keeps multi-day runs tractable; protocol-level tests use 1000 ms.
struct NetworkParams {
    SimTime heartbeat_period_ms = 3'600'000;
    int lease_multiple = 3;
    double bandwidth_bytes_per_ms = 12'500.0;
    int prop_delay_ms_min = 1;
    int prop_delay_ms_max = 5;
    int underlay_hops_min = 1;
    int underlay_hops_max = 3;
    int peer_degree = 2;
};

struct DtMinSchedule {
    double minutes = 30.0;
    bool linear = false;          // anneal from `minutes` to `final_minutes`
    double final_minutes = 30.0;  // over the training episodes

    double at(int episode, int total_episodes) const;
};

struct PayloadParams {
    std::int64_t bytes = 1024;
    bool synthetic = true;  // per-domain seeded size streams
};

struct LatencySweepParams {
    std::vector<std::int64_t> volumes_bytes{100'000,     1'000'000,   4'000'000,
                                            16'000'000,  64'000'000,  200'000'000,
                                            300'000'000, 400'000'000};
    std::int64_t cutover_bytes = 200'000'000;  // discovery-only below this
    PolicyKind policy = PolicyKind::Ddpg;
    int train_episodes = 120;
    SimTime heartbeat_period_ms = 1000;  // protocol-scale rounds
};

struct EnergySweepParams {
    std::vector<int> publishers{15, 30, 60};
    int days = 30;
    int train_episodes = 120;
};

struct TrainParams {
    int episodes = 300;
    int eval_days = 50;
};

struct ExperimentConfig {
    Scenario scenario = Scenario::ThreeService;
    int n_publishers = 10;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::string out_dir = "out";
    bool trace = true;
    double d_threshold_ms = 180.0;
    double lambda = 0.3;
    DtMinSchedule dt_min;
    PayloadParams payload;
    NetworkParams network;
    energy::BatteryModel battery;
    ddpg::Hyperparams ddpg;
    LatencySweepParams latency;
    EnergySweepParams energy_sweep;
    TrainParams train;
    double periodic_minute = 540.0;  // baseline transmission minute

    void validate() const;

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_json_file(const std::filesystem::path& path);
    std::string to_json_text() const;
};

/// Publisher counts per domain: even split, remainder to lowest domain ids.
std::vector<int> domain_split(Scenario scenario, int n_publishers);

/// Per-domain synthetic reading streams; only the byte size feeds the
/// measured quantities, the value is content payload.
struct SyntheticReading {
    double value = 0.0;
    std::int64_t payload_bytes = 0;
};
SyntheticReading synthetic_reading(DomainId domain, int device_id, int day,
                                   std::uint64_t seed);

/// Builds the scenario network: per-domain gateway + service app and the
/// publisher devices, deterministic from the seed.
std::unique_ptr<sim::SimNetwork> build_network(const ExperimentConfig& config,
                                               Scenario scenario, int n_publishers,
                                               std::uint64_t seed, int horizon_days,
                                               DeviceState rest_state);

/// Environment whose reset() rebuilds the scenario above.
sched::ScheduleEnv make_env(const ExperimentConfig& config, Scenario scenario,
                            int n_publishers, std::uint64_t seed, int horizon_days,
                            DeviceState rest_state,
                            std::optional<std::int64_t> payload_override = std::nullopt);

/// Trains a fresh agent on the scenario with what-if episode starts.
ddpg::DdpgAgent train_agent(const ExperimentConfig& config, Scenario scenario,
                            int n_publishers, std::uint64_t seed, int episodes,
                            std::vector<ddpg::EpisodeRecord>* curve = nullptr,
                            std::optional<std::int64_t> payload_override = std::nullopt);

/// Per-day action source for the evaluation runners.
sched::ActionVector policy_action(PolicyKind kind, const sched::StateVector& state, int day,
                                  int n_devices, double periodic_minute,
                                  std::mt19937_64& rng, const ddpg::DdpgAgent* agent);

struct EvalSummary {
    std::vector<double> daily_r_total;
    double mean_r_total = 0.0;
    double total_consumed_pct = 0.0;
    double p95_ms = 0.0;
    double max_conservation_error = 0.0;
    std::uint64_t cross_domain_drops = 0;
};

/// Runs `days` consecutive simulated days under one policy on a fresh
/// network. Baselines idle (or stay active) between sends; the managed
/// policy sleeps.
EvalSummary evaluate_policy(const ExperimentConfig& config, Scenario scenario,
                            int n_publishers, std::uint64_t seed, int days, PolicyKind kind,
                            const ddpg::DdpgAgent* agent = nullptr,
                            std::optional<std::int64_t> payload_override = std::nullopt);

struct LatencyPointResult {
    double p95_ms = 0.0;
    std::optional<double> p95_discovery_ms;
    std::optional<double> p95_data_ms;
    std::uint64_t total_bytes = 0;
    std::size_t samples = 0;
};

/// One latency-sweep point: discovery rounds up to min(volume, cutover)
/// bytes; above the cutover the remaining volume flows as data exchange,
/// split per service across its publishers.
LatencyPointResult run_latency_point(const ExperimentConfig& config, Scenario scenario,
                                     std::int64_t volume_bytes, std::uint64_t seed,
                                     PolicyKind policy, const ddpg::DdpgAgent* agent = nullptr,
                                     std::optional<std::int64_t> cutover_override =
                                         std::nullopt);

struct SeriesStats {
    int n = 0;
    double mean = 0.0;
    double lo = 0.0;     // min over seeds (two-sided error)
    double hi = 0.0;     // max over seeds
    double ci95_lo = 0.0;
    double ci95_hi = 0.0;
};
SeriesStats series_stats(const std::vector<double>& values);

struct LatencySweepRow {
    Scenario scenario;
    std::int64_t volume_bytes = 0;
    SeriesStats p95;
    double p95_discovery_mean = 0.0;
    double p95_data_mean = 0.0;  // 0 when the point is discovery-only
    double total_bytes_mean = 0.0;
    double samples_mean = 0.0;
};
std::vector<LatencySweepRow> latency_sweep(const ExperimentConfig& config);
std::string latency_sweep_csv(const std::vector<LatencySweepRow>& rows);

struct EnergySweepRow {
    int n_publishers = 0;
    PolicyKind policy;
    SeriesStats total_consumed;
    double normalized = 0.0;  // by the per-point maximum across policies
};
std::vector<EnergySweepRow> energy_sweep(const ExperimentConfig& config);
std::string energy_sweep_csv(const std::vector<EnergySweepRow>& rows);

struct TrainSessionResult {
    int episodes_done = 0;
    std::vector<std::string> outputs;  // file names relative to out_dir
};

/// Full training run with all exports (learning curve, episode log,
/// checkpoint, trace when enabled, overlay snapshot, network stats and
/// energy report) written under out_dir. Deterministic per (config, seed).
TrainSessionResult run_training_session(const ExperimentConfig& config,
                                        const std::filesystem::path& out_dir,
                                        const std::optional<std::filesystem::path>& resume =
                                            std::nullopt);

/// CLI entry points. Subcommands: train, latency-sweep, energy-sweep,
/// replay, validate-config. Returns the process exit code.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace twincity::harness

#include "twincity/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace twincity::harness {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + salt * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::vector<DomainId> scenario_domains(Scenario scenario) {
    if (scenario == Scenario::OneService) {
        return {kAirQualityDomain};
    }
    return {kAirQualityDomain, kTransportDomain, kSmartFarmDomain};
}

DeviceState rest_state_for(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Ddpg: return DeviceState::Sleep;   // managed wake-up
        case PolicyKind::AlwaysActive: return DeviceState::Active;
        default: return DeviceState::Idle;  // unmanaged baselines idle
    }
}

// Critical t values (two-sided 95%) for df = 1..30; ~1.96 beyond.
double t_crit_95(int df) {
    static constexpr double table[] = {
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
        2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
        2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
    if (df < 1) {
        return 0.0;
    }
    if (df <= 30) {
        return table[df - 1];
    }
    return 1.96;
}

}  // namespace

std::vector<int> domain_split(Scenario scenario, int n_publishers) {
    if (n_publishers < 0) {
        throw std::invalid_argument("domain_split: n_publishers must be >= 0");
    }
    const int k = scenario == Scenario::OneService ? 1 : 3;
    std::vector<int> counts(static_cast<std::size_t>(k), n_publishers / k);
    for (int d = 0; d < n_publishers % k; ++d) {
        ++counts[static_cast<std::size_t>(d)];  // remainder to lowest domain ids
    }
    return counts;
}

SyntheticReading synthetic_reading(DomainId domain, int device_id, int day,
                                   std::uint64_t seed) {
    std::mt19937_64 rng(mix(seed, 0xDA7A0000ull + static_cast<std::uint64_t>(domain.id) * 1000003ull +
                                      static_cast<std::uint64_t>(device_id) * 8111ull +
                                      static_cast<std::uint64_t>(day)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double base_value = 0.0;
    double amplitude = 0.0;
    std::int64_t base_bytes = 1024;
    switch (domain.id) {
        case 0:  // air quality index
            base_value = 42.0;
            amplitude = 18.0;
            base_bytes = 1000;
            break;
        case 1:  // vehicles per interval
            base_value = 310.0;
            amplitude = 240.0;
            base_bytes = 1600;
            break;
        case 2:  // soil moisture percent
            base_value = 27.0;
            amplitude = 9.0;
            base_bytes = 800;
            break;
        default:
            base_value = 10.0;
            amplitude = 2.0;
            break;
    }
    SyntheticReading r;
    const double phase = 2.0 * 3.14159265358979323846 *
                         (static_cast<double>(day % 7) / 7.0 + unit(rng) * 0.05);
    r.value = base_value + amplitude * std::sin(phase) + (unit(rng) - 0.5) * amplitude * 0.2;
    r.payload_bytes =
        std::max<std::int64_t>(64, static_cast<std::int64_t>(
                                       std::llround(static_cast<double>(base_bytes) *
                                                    (0.85 + 0.3 * unit(rng)))));
    return r;
}

std::unique_ptr<sim::SimNetwork> build_network(const ExperimentConfig& config,
                                               Scenario scenario, int n_publishers,
                                               std::uint64_t seed, int horizon_days,
                                               DeviceState rest_state) {
    config.validate();
    sim::SimConfig sc;
    sc.seed = seed;
    sc.heartbeat_period_ms = config.network.heartbeat_period_ms;
    sc.lease_multiple = config.network.lease_multiple;
    sc.bandwidth_bytes_per_ms = config.network.bandwidth_bytes_per_ms;
    sc.prop_delay_ms_min = config.network.prop_delay_ms_min;
    sc.prop_delay_ms_max = config.network.prop_delay_ms_max;
    sc.underlay_hops_min = config.network.underlay_hops_min;
    sc.underlay_hops_max = config.network.underlay_hops_max;
    sc.peer_degree = config.network.peer_degree;
    sc.horizon_ms = static_cast<SimTime>(horizon_days) * kMsPerDay;

    auto net = std::make_unique<sim::SimNetwork>(sc, config.battery);
    net->set_rest_state(rest_state);
    const auto domains = scenario_domains(scenario);
    for (DomainId d : domains) {
        net->add_domain(d);
    }
    const auto counts = domain_split(scenario, n_publishers);
    for (std::size_t di = 0; di < domains.size(); ++di) {
        for (int i = 0; i < counts[di]; ++i) {
            const int device_id = static_cast<int>(net->devices().size());
            const std::int64_t payload =
                config.payload.synthetic
                    ? synthetic_reading(domains[di], device_id, 0, seed).payload_bytes
                    : config.payload.bytes;
            net->add_device(domains[di], 100.0, payload);
        }
    }
    return net;
}

sched::ScheduleEnv make_env(const ExperimentConfig& config, Scenario scenario,
                            int n_publishers, std::uint64_t seed, int horizon_days,
                            DeviceState rest_state,
                            std::optional<std::int64_t> payload_override) {
    sched::EnvConfig env_cfg;
    env_cfg.d_threshold_ms = config.d_threshold_ms;
    env_cfg.lambda = config.lambda;
    env_cfg.dt_min_minutes = config.dt_min.minutes;
    auto builder = [config, scenario, n_publishers, seed, horizon_days, rest_state,
                    payload_override]() {
        auto net = build_network(config, scenario, n_publishers, seed, horizon_days,
                                 rest_state);
        if (payload_override) {
            for (int id : net->device_ids()) {
                net->device(id).payload_bytes = *payload_override;
            }
        }
        return net;
    };
    return sched::ScheduleEnv(std::move(builder), env_cfg);
}

ddpg::DdpgAgent train_agent(const ExperimentConfig& config, Scenario scenario,
                            int n_publishers, std::uint64_t seed, int episodes,
                            std::vector<ddpg::EpisodeRecord>* curve,
                            std::optional<std::int64_t> payload_override) {
    if (n_publishers < 1) {
        throw std::invalid_argument("train_agent: needs at least one publisher");
    }
    auto env = make_env(config, scenario, n_publishers, seed, 1, DeviceState::Sleep,
                        payload_override);
    ddpg::DdpgAgent agent(n_publishers, config.ddpg, seed);
    const auto states =
        sched::whatif_generate(mix(seed, 101), std::max(1, episodes), n_publishers);
    ddpg::TrainOptions options;
    options.episodes = episodes;
    options.initial_state = [states](int ep) {
        return states[static_cast<std::size_t>(ep) % states.size()];
    };
    const DtMinSchedule dt = config.dt_min;
    options.dt_min_schedule = [dt, episodes](int ep) { return dt.at(ep, episodes); };
    if (curve) {
        options.on_episode = [curve](const ddpg::EpisodeRecord& rec) {
            curve->push_back(rec);
        };
    }
    ddpg::train(env, agent, options);
    return agent;
}

sched::ActionVector policy_action(PolicyKind kind, const sched::StateVector& state, int day,
                                  int n_devices, double periodic_minute,
                                  std::mt19937_64& rng, const ddpg::DdpgAgent* agent) {
    sched::ActionVector a;
    switch (kind) {
        case PolicyKind::Ddpg:
            if (!agent) {
                throw std::invalid_argument("policy_action: ddpg policy needs an agent");
            }
            return agent->policy_action(state);
        case PolicyKind::PeriodicSynchronized:
            a.minutes.assign(static_cast<std::size_t>(n_devices), periodic_minute);
            return a;
        case PolicyKind::UniformRandom: {
            std::uniform_real_distribution<double> minutes(0.0, kMinutesPerDay);
            a.minutes.resize(static_cast<std::size_t>(n_devices));
            for (double& m : a.minutes) {
                m = minutes(rng);
            }
            return a;
        }
        case PolicyKind::AlwaysActive:
            a.minutes.assign(static_cast<std::size_t>(n_devices), 0.0);
            return a;
    }
    (void)day;
    throw std::logic_error("policy_action: unhandled policy");
}

EvalSummary evaluate_policy(const ExperimentConfig& config, Scenario scenario,
                            int n_publishers, std::uint64_t seed, int days, PolicyKind kind,
                            const ddpg::DdpgAgent* agent,
                            std::optional<std::int64_t> payload_override) {
    if (days < 1) {
        throw std::invalid_argument("evaluate_policy: days must be >= 1");
    }
    auto env = make_env(config, scenario, n_publishers, seed, days, rest_state_for(kind),
                        payload_override);
    env.reset();
    std::mt19937_64 rng(mix(seed, 202));
    EvalSummary summary;
    std::vector<double> delays;
    for (int day = 0; day < days; ++day) {
        const auto state = env.observe();
        sched::StepResult result;
        if (kind == PolicyKind::AlwaysActive) {
            result = env.run_always_active_day();
        } else {
            result = env.step(policy_action(kind, state, day, n_publishers,
                                            config.periodic_minute, rng, agent));
        }
        summary.daily_r_total.push_back(result.reward.r_total);
        for (const auto& s : result.samples) {
            delays.push_back(s.d_ms);
        }
        summary.max_conservation_error = std::max(summary.max_conservation_error,
                                                  env.net().max_conservation_error());
    }
    summary.mean_r_total =
        std::accumulate(summary.daily_r_total.begin(), summary.daily_r_total.end(), 0.0) /
        static_cast<double>(days);
    summary.total_consumed_pct = env.net().ledger().total_consumption();
    summary.p95_ms = delays.empty() ? 0.0 : netsim::percentile(delays, 95.0);
    summary.cross_domain_drops = env.net().cross_domain_drops();
    return summary;
}

LatencyPointResult run_latency_point(const ExperimentConfig& config, Scenario scenario,
                                     std::int64_t volume_bytes, std::uint64_t seed,
                                     PolicyKind policy, const ddpg::DdpgAgent* agent,
                                     std::optional<std::int64_t> cutover_override) {
    if (volume_bytes <= 0) {
        throw std::invalid_argument(
            "run_latency_point: volume must be > 0 (a zero volume produces no samples)");
    }
    const std::int64_t cutover = cutover_override.value_or(config.latency.cutover_bytes);
    const std::int64_t discovery_budget = std::min(volume_bytes, cutover);
    const std::int64_t data_per_service = std::max<std::int64_t>(0, volume_bytes - cutover);

    ExperimentConfig cfg = config;
    cfg.network.heartbeat_period_ms = config.latency.heartbeat_period_ms;
    auto net = build_network(cfg, scenario, config.n_publishers, seed, 1,
                             rest_state_for(policy));
    auto& engine = net->engine();
    net->start();

    // Discovery phase: announcement rounds every heartbeat period until the
    // sent discovery volume reaches the budget.
    const SimTime period = cfg.network.heartbeat_period_ms;
    while (true) {
        const auto it = engine.stats().bytes_by_phase.find(netsim::Phase::Discovery);
        const std::uint64_t sent = it == engine.stats().bytes_by_phase.end() ? 0 : it->second;
        if (sent >= static_cast<std::uint64_t>(discovery_budget)) {
            break;
        }
        net->discovery_round();
        engine.run_until(engine.now() + period);
    }

    // Data-exchange phase: the remaining volume is requested per service and
    // split across the domain's publishers at the scheduled minutes.
    if (data_per_service > 0 && config.n_publishers > 0) {
        net->data_exchange_handshake();
        const auto counts = domain_split(scenario, config.n_publishers);
        std::vector<std::int64_t> share(counts.size(), 0);
        for (std::size_t d = 0; d < counts.size(); ++d) {
            if (counts[d] > 0) {
                share[d] = std::max<std::int64_t>(1, data_per_service / counts[d]);
            }
        }
        sched::StateVector state;
        for (const Device& dev : net->devices()) {
            state.batteries.push_back(dev.battery_pct);
            state.last_tx_min.push_back(0.0);
        }
        std::mt19937_64 rng(mix(seed, 303));
        const auto action = policy_action(policy, state, 0, config.n_publishers,
                                          config.periodic_minute, rng, agent);
        for (const Device& dev : net->devices()) {
            // Domain ids equal the split indices for both scenario kinds.
            const std::int64_t payload = share[static_cast<std::size_t>(dev.domain.id)];
            SimTime at = minutes_to_simtime(
                policy == PolicyKind::AlwaysActive
                    ? 0.0
                    : action.minutes[static_cast<std::size_t>(dev.id)]);
            at = std::max(at, engine.now());
            engine.schedule(at, netsim::EventKind::DeviceWake,
                            [net = net.get(), id = dev.id, payload](SimTime) {
                                net->publish_reading(id, payload);
                            });
        }
    }
    engine.run_until(kMsPerDay);
    engine.run_all();  // drain in-flight transfers past day end

    LatencyPointResult r;
    const auto& stats = engine.stats();
    const auto all = stats.delays();
    if (all.empty()) {
        throw std::runtime_error("run_latency_point: no samples recorded");
    }
    r.p95_ms = netsim::percentile(all, 95.0);
    const auto disc = stats.delays(netsim::Phase::Discovery);
    if (!disc.empty()) {
        r.p95_discovery_ms = netsim::percentile(disc, 95.0);
    }
    const auto data = stats.delays(netsim::Phase::DataExchange);
    if (!data.empty()) {
        r.p95_data_ms = netsim::percentile(data, 95.0);
    }
    r.total_bytes = stats.total_bytes();
    r.samples = stats.samples.size();
    return r;
}

SeriesStats series_stats(const std::vector<double>& values) {
    SeriesStats s;
    s.n = static_cast<int>(values.size());
    if (values.empty()) {
        return s;
    }
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) /
             static_cast<double>(values.size());
    s.lo = *std::min_element(values.begin(), values.end());
    s.hi = *std::max_element(values.begin(), values.end());
    if (values.size() < 2) {
        s.ci95_lo = s.ci95_hi = s.mean;
        return s;
    }
    double var = 0.0;
    for (double v : values) {
        var += (v - s.mean) * (v - s.mean);
    }
    var /= static_cast<double>(values.size() - 1);
    const double half = t_crit_95(s.n - 1) * std::sqrt(var / static_cast<double>(s.n));
    s.ci95_lo = s.mean - half;
    s.ci95_hi = s.mean + half;
    return s;
}

std::vector<LatencySweepRow> latency_sweep(const ExperimentConfig& config) {
    std::vector<LatencySweepRow> rows;
    const std::int64_t max_volume = config.latency.volumes_bytes.back();
    const std::int64_t max_data = max_volume - config.latency.cutover_bytes;

    for (Scenario scenario : {Scenario::OneService, Scenario::ThreeService}) {
        std::optional<ddpg::DdpgAgent> agent;
        if (config.latency.policy == PolicyKind::Ddpg && max_data > 0 &&
            config.n_publishers > 0 && config.latency.train_episodes > 0) {
            const auto counts = domain_split(scenario, config.n_publishers);
            const int min_count = *std::min_element(counts.begin(), counts.end());
            const std::int64_t share =
                std::max<std::int64_t>(1, max_data / std::max(1, min_count));
            agent = train_agent(config, scenario, config.n_publishers, config.seeds.front(),
                                config.latency.train_episodes, nullptr, share);
        }
        for (std::int64_t volume : config.latency.volumes_bytes) {
            std::vector<double> p95s, p95s_disc, p95s_data, bytes, samples;
            for (std::uint64_t seed : config.seeds) {
                const auto point =
                    run_latency_point(config, scenario, volume, seed, config.latency.policy,
                                      agent ? &*agent : nullptr);
                p95s.push_back(point.p95_ms);
                if (point.p95_discovery_ms) {
                    p95s_disc.push_back(*point.p95_discovery_ms);
                }
                if (point.p95_data_ms) {
                    p95s_data.push_back(*point.p95_data_ms);
                }
                bytes.push_back(static_cast<double>(point.total_bytes));
                samples.push_back(static_cast<double>(point.samples));
            }
            LatencySweepRow row;
            row.scenario = scenario;
            row.volume_bytes = volume;
            row.p95 = series_stats(p95s);
            row.p95_discovery_mean = series_stats(p95s_disc).mean;
            row.p95_data_mean = series_stats(p95s_data).mean;
            row.total_bytes_mean = series_stats(bytes).mean;
            row.samples_mean = series_stats(samples).mean;
            rows.push_back(row);
        }
    }
    return rows;
}

std::string latency_sweep_csv(const std::vector<LatencySweepRow>& rows) {
    std::ostringstream out;
    out.precision(9);
    out << "scenario,volume_bytes,seeds,p95_ms_mean,p95_ms_min,p95_ms_max,p95_ms_ci95_lo,"
           "p95_ms_ci95_hi,p95_discovery_ms_mean,p95_data_ms_mean,total_bytes_mean,"
           "samples_mean\n";
    for (const auto& r : rows) {
        out << to_string(r.scenario) << ',' << r.volume_bytes << ',' << r.p95.n << ','
            << r.p95.mean << ',' << r.p95.lo << ',' << r.p95.hi << ',' << r.p95.ci95_lo << ','
            << r.p95.ci95_hi << ',' << r.p95_discovery_mean << ',' << r.p95_data_mean << ','
            << r.total_bytes_mean << ',' << r.samples_mean << '\n';
    }
    return out.str();
}

std::vector<EnergySweepRow> energy_sweep(const ExperimentConfig& config) {
    std::vector<EnergySweepRow> rows;
    const std::vector<PolicyKind> policies{PolicyKind::Ddpg, PolicyKind::PeriodicSynchronized,
                                           PolicyKind::UniformRandom,
                                           PolicyKind::AlwaysActive};
    for (int n_pubs : config.energy_sweep.publishers) {
        if (n_pubs == 0) {
            // Nothing transmits and nothing drains; normalization is skipped.
            for (PolicyKind p : policies) {
                EnergySweepRow row;
                row.n_publishers = 0;
                row.policy = p;
                row.total_consumed = series_stats({});
                row.normalized = 0.0;
                rows.push_back(row);
            }
            continue;
        }
        std::optional<ddpg::DdpgAgent> agent;
        if (config.energy_sweep.train_episodes > 0) {
            agent = train_agent(config, Scenario::ThreeService, n_pubs, config.seeds.front(),
                                config.energy_sweep.train_episodes);
        }
        std::vector<EnergySweepRow> point_rows;
        double max_mean = 0.0;
        for (PolicyKind p : policies) {
            std::vector<double> totals;
            for (std::uint64_t seed : config.seeds) {
                const auto summary =
                    evaluate_policy(config, Scenario::ThreeService, n_pubs, seed,
                                    config.energy_sweep.days, p,
                                    p == PolicyKind::Ddpg && agent ? &*agent : nullptr);
                totals.push_back(summary.total_consumed_pct);
            }
            EnergySweepRow row;
            row.n_publishers = n_pubs;
            row.policy = p;
            row.total_consumed = series_stats(totals);
            max_mean = std::max(max_mean, row.total_consumed.mean);
            point_rows.push_back(row);
        }
        for (auto& row : point_rows) {
            row.normalized = max_mean > 0.0 ? row.total_consumed.mean / max_mean : 0.0;
            rows.push_back(row);
        }
    }
    return rows;
}

std::string energy_sweep_csv(const std::vector<EnergySweepRow>& rows) {
    std::ostringstream out;
    out.precision(9);
    out << "n_publishers,policy,seeds,total_consumed_pct_mean,total_consumed_pct_min,"
           "total_consumed_pct_max,total_consumed_pct_ci95_lo,total_consumed_pct_ci95_hi,"
           "normalized\n";
    for (const auto& r : rows) {
        out << r.n_publishers << ',' << to_string(r.policy) << ',' << r.total_consumed.n << ','
            << r.total_consumed.mean << ',' << r.total_consumed.lo << ','
            << r.total_consumed.hi << ',' << r.total_consumed.ci95_lo << ','
            << r.total_consumed.ci95_hi << ',' << r.normalized << '\n';
    }
    return out.str();
}

}  // namespace twincity::harness

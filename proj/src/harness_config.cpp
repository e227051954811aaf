#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "twincity/harness.hpp"

namespace twincity::harness {

using nlohmann::json;

std::string to_string(Scenario s) {
    return s == Scenario::OneService ? "one_service" : "three_service";
}

std::string to_string(PolicyKind p) {
    switch (p) {
        case PolicyKind::Ddpg: return "ddpg";
        case PolicyKind::PeriodicSynchronized: return "periodic";
        case PolicyKind::UniformRandom: return "random";
        case PolicyKind::AlwaysActive: return "always_on";
    }
    return "?";
}

Scenario parse_scenario(const std::string& s) {
    if (s == "one_service") {
        return Scenario::OneService;
    }
    if (s == "three_service") {
        return Scenario::ThreeService;
    }
    throw std::invalid_argument("scenario must be one_service or three_service, got '" + s +
                                "'");
}

PolicyKind parse_policy(const std::string& s) {
    if (s == "ddpg") return PolicyKind::Ddpg;
    if (s == "periodic") return PolicyKind::PeriodicSynchronized;
    if (s == "random") return PolicyKind::UniformRandom;
    if (s == "always_on") return PolicyKind::AlwaysActive;
    throw std::invalid_argument("policy must be ddpg|periodic|random|always_on, got '" + s +
                                "'");
}

double DtMinSchedule::at(int episode, int total_episodes) const {
    if (!linear || total_episodes <= 1) {
        return minutes;
    }
    const double t = std::min(1.0, static_cast<double>(episode) /
                                       static_cast<double>(total_episodes - 1));
    return minutes + (final_minutes - minutes) * t;
}

namespace {

// Rejects keys the schema does not define, with the full path in the error.
class StrictObject {
public:
    StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw std::invalid_argument(path_ + ": expected an object");
        }
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    template <typename T>
    void get(const std::string& key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) {
            return;
        }
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw std::invalid_argument(path_ + "." + key + ": " + e.what());
        }
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.contains(key)) {
                throw std::invalid_argument(path_ + "." + key + ": unknown key");
            }
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void parse_range(StrictObject& obj, const std::string& key, int& lo, int& hi) {
    if (!obj.has(key)) {
        return;
    }
    const auto& arr = obj.raw(key);
    if (!arr.is_array() || arr.size() != 2) {
        throw std::invalid_argument(key + ": expected [lo, hi]");
    }
    lo = arr[0].get<int>();
    hi = arr[1].get<int>();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    ExperimentConfig c;
    StrictObject root(j, "config");

    if (root.has("scenario")) {
        c.scenario = parse_scenario(root.raw("scenario").get<std::string>());
    }
    root.get("n_publishers", c.n_publishers);
    root.get("seeds", c.seeds);
    root.get("out_dir", c.out_dir);
    root.get("trace", c.trace);
    root.get("d_threshold_ms", c.d_threshold_ms);
    root.get("lambda", c.lambda);
    root.get("periodic_minute", c.periodic_minute);

    if (root.has("dt_min")) {
        StrictObject o(root.raw("dt_min"), "config.dt_min");
        o.get("minutes", c.dt_min.minutes);
        if (o.has("schedule")) {
            const auto s = o.raw("schedule").get<std::string>();
            if (s == "fixed") {
                c.dt_min.linear = false;
            } else if (s == "linear") {
                c.dt_min.linear = true;
            } else {
                throw std::invalid_argument("config.dt_min.schedule: must be fixed or linear");
            }
        }
        o.get("final_minutes", c.dt_min.final_minutes);
        o.finish();
    }
    if (root.has("payload")) {
        StrictObject o(root.raw("payload"), "config.payload");
        o.get("bytes", c.payload.bytes);
        o.get("synthetic", c.payload.synthetic);
        o.finish();
    }
    if (root.has("network")) {
        StrictObject o(root.raw("network"), "config.network");
        o.get("heartbeat_period_ms", c.network.heartbeat_period_ms);
        o.get("lease_multiple", c.network.lease_multiple);
        o.get("bandwidth_bytes_per_ms", c.network.bandwidth_bytes_per_ms);
        parse_range(o, "prop_delay_ms", c.network.prop_delay_ms_min,
                    c.network.prop_delay_ms_max);
        parse_range(o, "underlay_hops", c.network.underlay_hops_min,
                    c.network.underlay_hops_max);
        o.get("peer_degree", c.network.peer_degree);
        o.finish();
    }
    if (root.has("battery")) {
        StrictObject o(root.raw("battery"), "config.battery");
        o.get("sleep_drain_pct_per_min", c.battery.sleep_drain_pct_per_min);
        o.get("idle_drain_pct_per_min", c.battery.idle_drain_pct_per_min);
        o.get("active_drain_pct_per_min", c.battery.active_drain_pct_per_min);
        o.get("wake_cost_pct", c.battery.wake_cost_pct);
        o.get("tx_cost_pct_per_kb", c.battery.tx_cost_pct_per_kb);
        o.finish();
    }
    if (root.has("ddpg")) {
        StrictObject o(root.raw("ddpg"), "config.ddpg");
        o.get("learning_rate", c.ddpg.learning_rate);
        o.get("actor_learning_rate", c.ddpg.actor_learning_rate);
        o.get("momentum", c.ddpg.momentum);
        o.get("gamma", c.ddpg.gamma);
        o.get("batch_size", c.ddpg.batch_size);
        o.get("tau", c.ddpg.tau);
        o.get("buffer_capacity", c.ddpg.buffer_capacity);
        if (o.has("epsilon")) {
            StrictObject e(o.raw("epsilon"), "config.ddpg.epsilon");
            e.get("start", c.ddpg.epsilon_start);
            e.get("final", c.ddpg.epsilon_final);
            e.get("decay_fraction", c.ddpg.epsilon_decay_fraction);
            e.finish();
        }
        o.get("reward_scale", c.ddpg.reward_scale);
        o.get("updates_per_step", c.ddpg.updates_per_step);
        o.get("hidden", c.ddpg.hidden);
        if (o.has("exploration")) {
            const auto s = o.raw("exploration").get<std::string>();
            if (s == "epsilon") {
                c.ddpg.exploration = ddpg::ExplorationMode::EpsilonGreedy;
            } else if (s == "gaussian") {
                c.ddpg.exploration = ddpg::ExplorationMode::GaussianNoise;
            } else {
                throw std::invalid_argument(
                    "config.ddpg.exploration: must be epsilon or gaussian");
            }
        }
        o.get("gaussian_sigma_minutes", c.ddpg.gaussian_sigma_minutes);
        o.finish();
    }
    if (root.has("latency_sweep")) {
        StrictObject o(root.raw("latency_sweep"), "config.latency_sweep");
        o.get("volumes_bytes", c.latency.volumes_bytes);
        o.get("cutover_bytes", c.latency.cutover_bytes);
        if (o.has("policy")) {
            c.latency.policy = parse_policy(o.raw("policy").get<std::string>());
        }
        o.get("train_episodes", c.latency.train_episodes);
        o.get("heartbeat_period_ms", c.latency.heartbeat_period_ms);
        o.finish();
    }
    if (root.has("energy_sweep")) {
        StrictObject o(root.raw("energy_sweep"), "config.energy_sweep");
        o.get("publishers", c.energy_sweep.publishers);
        o.get("days", c.energy_sweep.days);
        o.get("train_episodes", c.energy_sweep.train_episodes);
        o.finish();
    }
    if (root.has("train")) {
        StrictObject o(root.raw("train"), "config.train");
        o.get("episodes", c.train.episodes);
        o.get("eval_days", c.train.eval_days);
        o.finish();
    }
    root.finish();
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("config: cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

void ExperimentConfig::validate() const {
    if (n_publishers < 0 || n_publishers > 600) {
        throw std::invalid_argument("config.n_publishers: must lie in [0, 600]");
    }
    if (seeds.empty()) {
        throw std::invalid_argument("config.seeds: at least one seed required");
    }
    if (!(d_threshold_ms > 0.0)) {
        throw std::invalid_argument("config.d_threshold_ms: must be > 0");
    }
    if (lambda < 0.0) {
        throw std::invalid_argument("config.lambda: must be >= 0");
    }
    if (!(periodic_minute >= 0.0 && periodic_minute <= kMinutesPerDay)) {
        throw std::invalid_argument("config.periodic_minute: must lie in [0, 1440]");
    }
    sched::ScheduleConstraint{dt_min.minutes}.validate();
    sched::ScheduleConstraint{dt_min.final_minutes}.validate();
    if (payload.bytes < 1) {
        throw std::invalid_argument("config.payload.bytes: must be >= 1");
    }
    sim::SimConfig sc;
    sc.heartbeat_period_ms = network.heartbeat_period_ms;
    sc.lease_multiple = network.lease_multiple;
    sc.bandwidth_bytes_per_ms = network.bandwidth_bytes_per_ms;
    sc.prop_delay_ms_min = network.prop_delay_ms_min;
    sc.prop_delay_ms_max = network.prop_delay_ms_max;
    sc.underlay_hops_min = network.underlay_hops_min;
    sc.underlay_hops_max = network.underlay_hops_max;
    sc.peer_degree = network.peer_degree;
    sc.validate();
    battery.validate();
    ddpg.validate();
    if (latency.volumes_bytes.empty()) {
        throw std::invalid_argument("config.latency_sweep.volumes_bytes: must be non-empty");
    }
    for (std::size_t i = 0; i < latency.volumes_bytes.size(); ++i) {
        if (latency.volumes_bytes[i] <= 0) {
            throw std::invalid_argument(
                "config.latency_sweep.volumes_bytes: volumes must be > 0");
        }
        if (i > 0 && latency.volumes_bytes[i] <= latency.volumes_bytes[i - 1]) {
            throw std::invalid_argument(
                "config.latency_sweep.volumes_bytes: must be strictly ascending");
        }
    }
    if (latency.cutover_bytes > latency.volumes_bytes.back()) {
        throw std::invalid_argument(
            "config.latency_sweep.cutover_bytes: must not exceed the maximum volume");
    }
    if (latency.train_episodes < 0 || latency.heartbeat_period_ms <= 0) {
        throw std::invalid_argument("config.latency_sweep: invalid training/heartbeat values");
    }
    for (int p : energy_sweep.publishers) {
        if (p < 0 || p > 600) {
            throw std::invalid_argument(
                "config.energy_sweep.publishers: counts must lie in [0, 600]");
        }
    }
    if (energy_sweep.days < 1 || energy_sweep.train_episodes < 0) {
        throw std::invalid_argument("config.energy_sweep: days/train_episodes invalid");
    }
    if (train.episodes < 0 || train.eval_days < 1) {
        throw std::invalid_argument("config.train: episodes/eval_days invalid");
    }
}

std::string ExperimentConfig::to_json_text() const {
    json j;
    j["scenario"] = to_string(scenario);
    j["n_publishers"] = n_publishers;
    j["seeds"] = seeds;
    j["out_dir"] = out_dir;
    j["trace"] = trace;
    j["d_threshold_ms"] = d_threshold_ms;
    j["lambda"] = lambda;
    j["periodic_minute"] = periodic_minute;
    j["dt_min"] = {{"minutes", dt_min.minutes},
                   {"schedule", dt_min.linear ? "linear" : "fixed"},
                   {"final_minutes", dt_min.final_minutes}};
    j["payload"] = {{"bytes", payload.bytes}, {"synthetic", payload.synthetic}};
    j["network"] = {{"heartbeat_period_ms", network.heartbeat_period_ms},
                    {"lease_multiple", network.lease_multiple},
                    {"bandwidth_bytes_per_ms", network.bandwidth_bytes_per_ms},
                    {"prop_delay_ms", {network.prop_delay_ms_min, network.prop_delay_ms_max}},
                    {"underlay_hops", {network.underlay_hops_min, network.underlay_hops_max}},
                    {"peer_degree", network.peer_degree}};
    j["battery"] = {{"sleep_drain_pct_per_min", battery.sleep_drain_pct_per_min},
                    {"idle_drain_pct_per_min", battery.idle_drain_pct_per_min},
                    {"active_drain_pct_per_min", battery.active_drain_pct_per_min},
                    {"wake_cost_pct", battery.wake_cost_pct},
                    {"tx_cost_pct_per_kb", battery.tx_cost_pct_per_kb}};
    j["ddpg"] = {{"learning_rate", ddpg.learning_rate},
                 {"actor_learning_rate", ddpg.actor_learning_rate},
                 {"momentum", ddpg.momentum},
                 {"gamma", ddpg.gamma},
                 {"batch_size", ddpg.batch_size},
                 {"tau", ddpg.tau},
                 {"buffer_capacity", ddpg.buffer_capacity},
                 {"epsilon",
                  {{"start", ddpg.epsilon_start},
                   {"final", ddpg.epsilon_final},
                   {"decay_fraction", ddpg.epsilon_decay_fraction}}},
                 {"reward_scale", ddpg.reward_scale},
                 {"updates_per_step", ddpg.updates_per_step},
                 {"hidden", ddpg.hidden},
                 {"exploration",
                  ddpg.exploration == ddpg::ExplorationMode::EpsilonGreedy ? "epsilon"
                                                                           : "gaussian"},
                 {"gaussian_sigma_minutes", ddpg.gaussian_sigma_minutes}};
    j["latency_sweep"] = {{"volumes_bytes", latency.volumes_bytes},
                          {"cutover_bytes", latency.cutover_bytes},
                          {"policy", to_string(latency.policy)},
                          {"train_episodes", latency.train_episodes},
                          {"heartbeat_period_ms", latency.heartbeat_period_ms}};
    j["energy_sweep"] = {{"publishers", energy_sweep.publishers},
                         {"days", energy_sweep.days},
                         {"train_episodes", energy_sweep.train_episodes}};
    j["train"] = {{"episodes", train.episodes}, {"eval_days", train.eval_days}};
    return j.dump(2);
}

}  // namespace twincity::harness

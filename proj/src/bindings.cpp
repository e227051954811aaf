#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "twincity/ddpg.hpp"
#include "twincity/harness.hpp"

namespace py = pybind11;
using namespace twincity;

namespace {

sched::StateVector state_from_lists(std::vector<double> batteries,
                                    std::vector<double> last_tx_min) {
    sched::StateVector s;
    s.batteries = std::move(batteries);
    s.last_tx_min = std::move(last_tx_min);
    return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "twincity: digital-twin IoT network simulator with an RTPS-lite pub/sub layer "
              "and a DDPG transmission-time scheduler";

    // core types
    py::enum_<DeviceState>(m, "DeviceState")
        .value("Idle", DeviceState::Idle)
        .value("Active", DeviceState::Active)
        .value("Sleep", DeviceState::Sleep);

    py::class_<DomainId>(m, "DomainId")
        .def(py::init<int>(), py::arg("id") = 0)
        .def_readwrite("id", &DomainId::id)
        .def("__repr__",
             [](const DomainId& d) { return "DomainId(" + domain_name(d) + ")"; })
        .def("__eq__", [](const DomainId& a, const DomainId& b) { return a == b; });

    py::class_<Device>(m, "Device")
        .def_readwrite("id", &Device::id)
        .def_readwrite("domain", &Device::domain)
        .def_readwrite("battery_pct", &Device::battery_pct)
        .def_readwrite("state", &Device::state)
        .def_readwrite("last_tx", &Device::last_tx)
        .def_readwrite("payload_bytes", &Device::payload_bytes);

    m.attr("AIR_Q_DOMAIN") = kAirQualityDomain;
    m.attr("TRANSPORT_DOMAIN") = kTransportDomain;
    m.attr("SMART_FARM_DOMAIN") = kSmartFarmDomain;
    m.attr("MS_PER_MINUTE") = kMsPerMinute;
    m.attr("MS_PER_DAY") = kMsPerDay;

    m.def("domain_name", &domain_name, py::arg("domain"));
    m.def("make_device", &make_device, py::arg("id"), py::arg("domain"),
          py::arg("battery_pct"), py::arg("payload_bytes"));
    m.def("minutes_to_simtime", &minutes_to_simtime, py::arg("minutes"));

    // netsim
    m.def(
        "percentile",
        [](const std::vector<double>& samples, double p) {
            return netsim::percentile(samples, p);
        },
        py::arg("samples"), py::arg("p"),
        "Nearest-rank percentile (sorted, 1-based rank ceil(p/100*n)).");

    // energy
    py::class_<energy::BatteryModel>(m, "BatteryModel")
        .def(py::init<>())
        .def_readwrite("sleep_drain_pct_per_min",
                       &energy::BatteryModel::sleep_drain_pct_per_min)
        .def_readwrite("idle_drain_pct_per_min", &energy::BatteryModel::idle_drain_pct_per_min)
        .def_readwrite("active_drain_pct_per_min",
                       &energy::BatteryModel::active_drain_pct_per_min)
        .def_readwrite("wake_cost_pct", &energy::BatteryModel::wake_cost_pct)
        .def_readwrite("tx_cost_pct_per_kb", &energy::BatteryModel::tx_cost_pct_per_kb)
        .def("validate", &energy::BatteryModel::validate);

    m.def("battery_at", &energy::battery_at, py::arg("device"), py::arg("schedule_time"),
          py::arg("model"), py::arg("day_start"));
    m.def(
        "normalize",
        [](const std::vector<double>& values, double reference_max) {
            return energy::normalize(values, reference_max);
        },
        py::arg("values"), py::arg("reference_max"));

    // scheduler
    py::class_<sched::StateVector>(m, "StateVector")
        .def(py::init(&state_from_lists), py::arg("batteries"), py::arg("last_tx_min"))
        .def_readwrite("batteries", &sched::StateVector::batteries)
        .def_readwrite("last_tx_min", &sched::StateVector::last_tx_min)
        .def("flatten_normalized", &sched::StateVector::flatten_normalized);

    py::class_<sched::ActionVector>(m, "ActionVector")
        .def(py::init([](std::vector<double> minutes) {
                 sched::ActionVector a;
                 a.minutes = std::move(minutes);
                 return a;
             }),
             py::arg("minutes"))
        .def_readwrite("minutes", &sched::ActionVector::minutes);

    py::class_<sched::RewardBreakdown>(m, "RewardBreakdown")
        .def_readonly("r_energy", &sched::RewardBreakdown::r_energy)
        .def_readonly("r_timeliness", &sched::RewardBreakdown::r_timeliness)
        .def_readonly("r_consecutive", &sched::RewardBreakdown::r_consecutive)
        .def_readonly("r_total", &sched::RewardBreakdown::r_total)
        .def_readonly("d_threshold_ms", &sched::RewardBreakdown::d_threshold_ms)
        .def_readonly("lambda_", &sched::RewardBreakdown::lambda);

    m.def(
        "enforce_min_interval",
        [](const std::vector<double>& a, const std::vector<double>& last_tx, double dt_min) {
            sched::ActionVector av;
            av.minutes = a;
            return sched::enforce_min_interval(av, last_tx, sched::ScheduleConstraint{dt_min})
                .minutes;
        },
        py::arg("a"), py::arg("last_tx_min"), py::arg("dt_min_minutes"));
    m.def(
        "reward_energy",
        [](const std::vector<double>& b) { return sched::reward_energy(b); },
        py::arg("batteries_after"));
    m.def(
        "reward_timeliness",
        [](const std::vector<double>& d, double thr) {
            return sched::reward_timeliness(d, thr);
        },
        py::arg("delays_ms"), py::arg("d_threshold_ms"));
    m.def(
        "reward_consecutive",
        [](const std::vector<double>& a, const std::vector<double>& a_prime, double dt_min,
           double lambda) {
            sched::ActionVector av, ap;
            av.minutes = a;
            ap.minutes = a_prime;
            return sched::reward_consecutive(av, ap, sched::ScheduleConstraint{dt_min},
                                             lambda);
        },
        py::arg("a"), py::arg("a_prime"), py::arg("dt_min_minutes"), py::arg("lambda_"));
    m.def(
        "reward_total",
        [](double e, double t, double c, double thr, double lambda) {
            return sched::reward_total(e, t, c, thr, lambda);
        },
        py::arg("r_energy"), py::arg("r_timeliness"), py::arg("r_consecutive"),
        py::arg("d_threshold_ms") = 180.0, py::arg("lambda_") = 0.3);
    m.def(
        "whatif_generate",
        [](std::uint64_t seed, int n_states, int n_devices) {
            return sched::whatif_generate(seed, n_states, n_devices);
        },
        py::arg("seed"), py::arg("n_states"), py::arg("n_devices"));

    // ddpg
    py::class_<ddpg::Hyperparams>(m, "Hyperparams")
        .def(py::init<>())
        .def_readwrite("learning_rate", &ddpg::Hyperparams::learning_rate)
        .def_readwrite("actor_learning_rate", &ddpg::Hyperparams::actor_learning_rate)
        .def_readwrite("momentum", &ddpg::Hyperparams::momentum)
        .def_readwrite("gamma", &ddpg::Hyperparams::gamma)
        .def_readwrite("batch_size", &ddpg::Hyperparams::batch_size)
        .def_readwrite("tau", &ddpg::Hyperparams::tau)
        .def_readwrite("buffer_capacity", &ddpg::Hyperparams::buffer_capacity)
        .def_readwrite("epsilon_start", &ddpg::Hyperparams::epsilon_start)
        .def_readwrite("epsilon_final", &ddpg::Hyperparams::epsilon_final)
        .def_readwrite("epsilon_decay_fraction", &ddpg::Hyperparams::epsilon_decay_fraction)
        .def_readwrite("reward_scale", &ddpg::Hyperparams::reward_scale)
        .def_readwrite("updates_per_step", &ddpg::Hyperparams::updates_per_step)
        .def_readwrite("hidden", &ddpg::Hyperparams::hidden)
        .def("validate", &ddpg::Hyperparams::validate);

    py::class_<ddpg::DdpgAgent>(m, "DdpgAgent")
        .def(py::init<int, ddpg::Hyperparams, std::uint64_t>(), py::arg("n_devices"),
             py::arg("hp"), py::arg("seed"))
        .def("policy_action",
             [](const ddpg::DdpgAgent& a, const sched::StateVector& s) {
                 return a.policy_action(s).minutes;
             })
        .def("select_action",
             [](ddpg::DdpgAgent& a, const sched::StateVector& s, double eps) {
                 return a.select_action(s, eps).minutes;
             })
        .def("save_text",
             [](const ddpg::DdpgAgent& a) {
                 std::ostringstream out;
                 a.save(out);
                 return out.str();
             })
        .def_static("load_text", [](const std::string& text) {
            std::istringstream in(text);
            return ddpg::DdpgAgent::load(in);
        });

    // harness
    py::class_<harness::ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_static("from_json_text", &harness::ExperimentConfig::from_json_text)
        .def("to_json_text", &harness::ExperimentConfig::to_json_text)
        .def("validate", &harness::ExperimentConfig::validate)
        .def_readwrite("n_publishers", &harness::ExperimentConfig::n_publishers)
        .def_readwrite("seeds", &harness::ExperimentConfig::seeds)
        .def_readwrite("out_dir", &harness::ExperimentConfig::out_dir);

    m.def(
        "domain_split",
        [](const std::string& scenario, int n) {
            return harness::domain_split(harness::parse_scenario(scenario), n);
        },
        py::arg("scenario"), py::arg("n_publishers"));
    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) { return harness::run_cli(args); },
        py::arg("args"), "Run a CLI subcommand in-process; returns the exit code.");

    m.attr("__version__") = "0.1.0";
}

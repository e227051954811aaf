#include "twincity/ddpg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace twincity::ddpg {

namespace {

double sigmoid(double z) {
    return 1.0 / (1.0 + std::exp(-z));
}

}  // namespace

Mlp::Mlp(std::vector<int> dims, OutputKind output, std::uint64_t seed)
    : dims_(std::move(dims)), output_(output) {
    if (dims_.size() < 2) {
        throw std::invalid_argument("Mlp: need at least input and output dims");
    }
    for (int d : dims_) {
        if (d < 1) {
            throw std::invalid_argument("Mlp: layer dims must be >= 1");
        }
    }
    std::size_t total = 0;
    for (std::size_t l = 1; l < dims_.size(); ++l) {
        w_offset_.push_back(total);
        total += static_cast<std::size_t>(dims_[l]) * static_cast<std::size_t>(dims_[l - 1]);
        b_offset_.push_back(total);
        total += static_cast<std::size_t>(dims_[l]);
    }
    params_.resize(total);

    // Seeded uniform fan-in scaling.
    std::mt19937_64 rng(seed);
    for (std::size_t l = 1; l < dims_.size(); ++l) {
        const double limit = 1.0 / std::sqrt(static_cast<double>(dims_[l - 1]));
        std::uniform_real_distribution<double> dist(-limit, limit);
        const std::size_t w0 = w_offset_[l - 1];
        const std::size_t b0 = b_offset_[l - 1];
        const auto wn = static_cast<std::size_t>(dims_[l]) *
                        static_cast<std::size_t>(dims_[l - 1]);
        for (std::size_t i = 0; i < wn; ++i) {
            params_[w0 + i] = dist(rng);
        }
        for (std::size_t i = 0; i < static_cast<std::size_t>(dims_[l]); ++i) {
            params_[b0 + i] = dist(rng);
        }
    }
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
    Tape tape;
    return forward(x, tape);
}

std::vector<double> Mlp::forward(std::span<const double> x, Tape& tape) const {
    if (static_cast<int>(x.size()) != dims_.front()) {
        throw std::invalid_argument("Mlp::forward: input dimension mismatch");
    }
    tape.input.assign(x.begin(), x.end());
    tape.pre.clear();
    tape.post.clear();
    std::vector<double> h(x.begin(), x.end());
    for (std::size_t l = 1; l < dims_.size(); ++l) {
        const auto rows = static_cast<std::size_t>(dims_[l]);
        const auto cols = static_cast<std::size_t>(dims_[l - 1]);
        const double* w = params_.data() + w_offset_[l - 1];
        const double* b = params_.data() + b_offset_[l - 1];
        std::vector<double> z(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            double acc = b[r];
            const double* wr = w + r * cols;
            for (std::size_t c = 0; c < cols; ++c) {
                acc += wr[c] * h[c];
            }
            z[r] = acc;
        }
        tape.pre.push_back(z);
        const bool last = l + 1 == dims_.size();
        std::vector<double> a(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            if (!last) {
                a[r] = z[r] > 0.0 ? z[r] : 0.0;
            } else if (output_ == OutputKind::Sigmoid) {
                a[r] = sigmoid(z[r]);
            } else {
                a[r] = z[r];
            }
        }
        tape.post.push_back(a);
        h = a;
    }
    return h;
}

Mlp::Gradient Mlp::backward(const Tape& tape, std::span<const double> dy) const {
    const std::size_t layers = dims_.size() - 1;
    if (tape.pre.size() != layers) {
        throw std::invalid_argument("Mlp::backward: tape does not match network");
    }
    if (static_cast<int>(dy.size()) != dims_.back()) {
        throw std::invalid_argument("Mlp::backward: dy dimension mismatch");
    }
    Gradient g;
    g.params.assign(params_.size(), 0.0);

    std::vector<double> dh(dy.begin(), dy.end());
    for (std::size_t l = layers; l >= 1; --l) {
        const auto rows = static_cast<std::size_t>(dims_[l]);
        const auto cols = static_cast<std::size_t>(dims_[l - 1]);
        const auto& z = tape.pre[l - 1];
        const auto& a = tape.post[l - 1];
        const bool last = l == layers;

        std::vector<double> dz(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            if (!last) {
                dz[r] = z[r] > 0.0 ? dh[r] : 0.0;
            } else if (output_ == OutputKind::Sigmoid) {
                dz[r] = dh[r] * a[r] * (1.0 - a[r]);
            } else {
                dz[r] = dh[r];
            }
        }

        const std::vector<double>& below =
            l >= 2 ? tape.post[l - 2] : tape.input;
        double* dw = g.params.data() + w_offset_[l - 1];
        double* db = g.params.data() + b_offset_[l - 1];
        for (std::size_t r = 0; r < rows; ++r) {
            double* dwr = dw + r * cols;
            for (std::size_t c = 0; c < cols; ++c) {
                dwr[c] += dz[r] * below[c];
            }
            db[r] += dz[r];
        }

        std::vector<double> dprev(cols, 0.0);
        const double* w = params_.data() + w_offset_[l - 1];
        for (std::size_t r = 0; r < rows; ++r) {
            const double* wr = w + r * cols;
            for (std::size_t c = 0; c < cols; ++c) {
                dprev[c] += wr[c] * dz[r];
            }
        }
        dh = std::move(dprev);
    }
    g.input = std::move(dh);
    return g;
}

void soft_update(const Mlp& online, Mlp& target, double tau) {
    if (!(tau > 0.0 && tau <= 1.0)) {
        throw std::invalid_argument("soft_update: tau must lie in (0, 1]");
    }
    if (online.param_count() != target.param_count()) {
        throw std::invalid_argument("soft_update: parameter shapes differ");
    }
    auto t = target.params();
    auto o = online.params();
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = tau * o[i] + (1.0 - tau) * t[i];
    }
}

void SgdMomentum::step(std::span<double> params, std::span<const double> grad, double lr,
                       double mu) {
    if (params.size() != velocity_.size() || grad.size() != velocity_.size()) {
        throw std::invalid_argument("SgdMomentum: size mismatch");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        velocity_[i] = mu * velocity_[i] - lr * grad[i];
        params[i] += velocity_[i];
    }
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) {
        throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
    }
}

void ReplayBuffer::push(sched::Transition t) {
    if (storage_.size() < capacity_) {
        storage_.push_back(std::move(t));
    } else {
        storage_[cursor_] = std::move(t);  // overwrite oldest, FIFO order
    }
    cursor_ = (cursor_ + 1) % capacity_;
    ++total_pushed_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t b,
                                                      std::mt19937_64& rng) const {
    if (storage_.size() < b) {
        throw std::runtime_error("ReplayBuffer: not enough transitions to sample a batch");
    }
    std::uniform_int_distribution<std::size_t> dist(0, storage_.size() - 1);
    std::vector<std::size_t> idx(b);
    for (auto& i : idx) {
        i = dist(rng);
    }
    return idx;
}

void ReplayBuffer::restore(std::vector<sched::Transition> storage, std::size_t cursor,
                           std::uint64_t total_pushed) {
    if (storage.size() > capacity_ || cursor >= std::max<std::size_t>(1, capacity_)) {
        throw std::invalid_argument("ReplayBuffer::restore: inconsistent snapshot");
    }
    storage_ = std::move(storage);
    cursor_ = cursor;
    total_pushed_ = total_pushed;
}

void Hyperparams::validate() const {
    const auto lr_ok = [](double lr) { return lr >= 0.001 && lr <= 0.2; };
    if (!lr_ok(learning_rate) || !lr_ok(actor_learning_rate)) {
        throw std::invalid_argument("Hyperparams: learning rates must lie in [0.001, 0.2]");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) {
        throw std::invalid_argument("Hyperparams: momentum must lie in [0, 1)");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("Hyperparams: gamma must lie in (0, 1)");
    }
    if (batch_size < 1) {
        throw std::invalid_argument("Hyperparams: batch_size must be >= 1");
    }
    if (!(tau > 0.0 && tau <= 1.0)) {
        throw std::invalid_argument("Hyperparams: tau must lie in (0, 1]");
    }
    if (buffer_capacity < static_cast<std::size_t>(batch_size)) {
        throw std::invalid_argument("Hyperparams: buffer capacity below batch size");
    }
    const auto eps_ok = [](double e) { return e >= 0.0 && e <= 1.0; };
    if (!eps_ok(epsilon_start) || !eps_ok(epsilon_final) ||
        !(epsilon_decay_fraction >= 0.0 && epsilon_decay_fraction <= 1.0)) {
        throw std::invalid_argument("Hyperparams: epsilon schedule invalid");
    }
    if (!(reward_scale > 0.0)) {
        throw std::invalid_argument("Hyperparams: reward_scale must be > 0");
    }
    if (updates_per_step < 1) {
        throw std::invalid_argument("Hyperparams: updates_per_step must be >= 1");
    }
    if (hidden.empty()) {
        throw std::invalid_argument("Hyperparams: at least one hidden layer required");
    }
    if (gaussian_sigma_minutes < 0.0) {
        throw std::invalid_argument("Hyperparams: gaussian sigma must be >= 0");
    }
}

double epsilon_at(int episode, int total_episodes, const Hyperparams& hp) {
    const double span = hp.epsilon_decay_fraction * static_cast<double>(total_episodes);
    if (span <= 0.0 || episode >= static_cast<int>(span)) {
        return hp.epsilon_final;
    }
    const double t = static_cast<double>(episode) / span;
    return hp.epsilon_start + (hp.epsilon_final - hp.epsilon_start) * t;
}

namespace {

std::vector<int> net_dims(int input, const std::vector<int>& hidden, int output) {
    std::vector<int> dims{input};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(output);
    return dims;
}

// Sub-seeds for the four networks and the agent stream, derived by splitmix.
std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + salt * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

DdpgAgent::DdpgAgent(int n_devices, Hyperparams hp, std::uint64_t seed)
    : n_devices_(n_devices),
      hp_(std::move(hp)),
      actor_(net_dims(2 * n_devices, hp_.hidden, n_devices), OutputKind::Sigmoid,
             mix(seed, 1)),
      critic_(net_dims(3 * n_devices, hp_.hidden, 1), OutputKind::Linear, mix(seed, 2)),
      actor_target_(actor_),
      critic_target_(critic_),
      actor_opt_(actor_.param_count()),
      critic_opt_(critic_.param_count()),
      buffer_(hp_.buffer_capacity),
      rng_(mix(seed, 3)) {
    if (n_devices_ < 1) {
        throw std::invalid_argument("DdpgAgent: n_devices must be >= 1");
    }
    hp_.validate();
}

sched::ActionVector DdpgAgent::policy_action(const sched::StateVector& s) const {
    const auto x = s.flatten_normalized();
    const auto out = actor_.forward(x);
    sched::ActionVector a;
    a.minutes.reserve(out.size());
    for (double o : out) {
        a.minutes.push_back(o * kMinutesPerDay);
    }
    return a;
}

sched::ActionVector DdpgAgent::select_action(const sched::StateVector& s, double epsilon) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw std::invalid_argument("select_action: epsilon must lie in [0, 1]");
    }
    if (hp_.exploration == ExplorationMode::GaussianNoise) {
        sched::ActionVector a = policy_action(s);
        std::normal_distribution<double> noise(0.0, hp_.gaussian_sigma_minutes);
        for (double& m : a.minutes) {
            m = std::clamp(m + noise(rng_), 0.0, kMinutesPerDay);
        }
        return a;
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng_) < epsilon) {
        std::uniform_real_distribution<double> minutes(0.0, kMinutesPerDay);
        sched::ActionVector a;
        a.minutes.resize(static_cast<std::size_t>(n_devices_));
        for (double& m : a.minutes) {
            m = minutes(rng_);
        }
        return a;
    }
    return policy_action(s);
}

std::vector<double> DdpgAgent::critic_input(const sched::StateVector& s,
                                            std::span<const double> action_minutes) const {
    std::vector<double> x = s.flatten_normalized();
    for (double m : action_minutes) {
        x.push_back(m / kMinutesPerDay);
    }
    return x;
}

double DdpgAgent::critic_update(std::span<const std::size_t> batch) {
    if (batch.empty()) {
        throw std::invalid_argument("critic_update: empty batch");
    }
    const double b = static_cast<double>(batch.size());
    std::vector<double> grad(critic_.param_count(), 0.0);
    double loss = 0.0;
    for (std::size_t idx : batch) {
        const sched::Transition& t = buffer_.at(idx);
        double y = t.r / hp_.reward_scale;
        if (!t.terminal) {
            const auto next_norm = t.s_next.flatten_normalized();
            const auto a_next = actor_target_.forward(next_norm);
            std::vector<double> xq(next_norm);
            xq.insert(xq.end(), a_next.begin(), a_next.end());
            y += hp_.gamma * critic_target_.forward(xq)[0];
        }
        Mlp::Tape tape;
        const auto x = critic_input(t.s, t.a.minutes);
        const double q = critic_.forward(x, tape)[0];
        const double err = q - y;
        loss += err * err;
        const double dy = 2.0 * err / b;
        const auto g = critic_.backward(tape, std::span<const double>(&dy, 1));
        for (std::size_t i = 0; i < grad.size(); ++i) {
            grad[i] += g.params[i];
        }
    }
    loss /= b;
    critic_opt_.step(critic_.params(), grad, hp_.learning_rate, hp_.momentum);
    return loss;
}

double DdpgAgent::actor_update(std::span<const std::size_t> batch) {
    if (batch.empty()) {
        throw std::invalid_argument("actor_update: empty batch");
    }
    const double b = static_cast<double>(batch.size());
    std::vector<double> ascent(actor_.param_count(), 0.0);
    double objective = 0.0;
    for (std::size_t idx : batch) {
        const sched::Transition& t = buffer_.at(idx);
        const auto s_norm = t.s.flatten_normalized();
        Mlp::Tape actor_tape;
        const auto a_norm = actor_.forward(s_norm, actor_tape);
        std::vector<double> xq(s_norm);
        xq.insert(xq.end(), a_norm.begin(), a_norm.end());
        Mlp::Tape critic_tape;
        objective += critic_.forward(xq, critic_tape)[0];

        const double dy = 1.0 / b;
        const auto gq = critic_.backward(critic_tape, std::span<const double>(&dy, 1));
        // dJ/da is the tail of the critic's input gradient.
        const std::span<const double> da(gq.input.data() + s_norm.size(),
                                         a_norm.size());
        const auto ga = actor_.backward(actor_tape, da);
        for (std::size_t i = 0; i < ascent.size(); ++i) {
            ascent[i] += ga.params[i];
        }
    }
    objective /= b;
    // Gradient ascent: descend the negated gradient.
    for (double& g : ascent) {
        g = -g;
    }
    actor_opt_.step(actor_.params(), ascent, hp_.actor_learning_rate, hp_.momentum);
    return objective;
}

void DdpgAgent::soft_update_targets(double tau) {
    soft_update(actor_, actor_target_, tau);
    soft_update(critic_, critic_target_, tau);
}

namespace {

// Doubles travel as 16-digit hex bit patterns so a reloaded agent is
// bit-identical to the saved one.
void put_d(std::ostream& out, double v) {
    out << std::hex << std::setw(16) << std::setfill('0') << std::bit_cast<std::uint64_t>(v)
        << std::dec << ' ';
}

double get_d(std::istream& in) {
    std::string tok;
    in >> tok;
    if (tok.size() != 16) {
        throw std::runtime_error("checkpoint: malformed double token");
    }
    return std::bit_cast<double>(std::stoull(tok, nullptr, 16));
}

void put_vec(std::ostream& out, std::span<const double> v) {
    out << v.size() << '\n';
    for (std::size_t i = 0; i < v.size(); ++i) {
        put_d(out, v[i]);
        if ((i + 1) % 8 == 0) {
            out << '\n';
        }
    }
    out << '\n';
}

std::vector<double> get_vec(std::istream& in) {
    std::size_t n = 0;
    in >> n;
    std::vector<double> v(n);
    for (auto& x : v) {
        x = get_d(in);
    }
    return v;
}

void expect(std::istream& in, const std::string& tag) {
    std::string tok;
    in >> tok;
    if (tok != tag) {
        throw std::runtime_error("checkpoint: expected '" + tag + "', got '" + tok + "'");
    }
}

}  // namespace

void DdpgAgent::save(std::ostream& out) const {
    out << "twincity-ddpg v1\n";
    out << "n_devices " << n_devices_ << '\n';
    out << "hp ";
    put_d(out, hp_.learning_rate);
    put_d(out, hp_.actor_learning_rate);
    put_d(out, hp_.momentum);
    put_d(out, hp_.gamma);
    out << hp_.batch_size << ' ';
    put_d(out, hp_.tau);
    out << hp_.buffer_capacity << ' ';
    put_d(out, hp_.epsilon_start);
    put_d(out, hp_.epsilon_final);
    put_d(out, hp_.epsilon_decay_fraction);
    put_d(out, hp_.reward_scale);
    out << hp_.updates_per_step << ' '
        << (hp_.exploration == ExplorationMode::EpsilonGreedy ? "epsilon" : "gaussian") << ' ';
    put_d(out, hp_.gaussian_sigma_minutes);
    out << "\nhidden " << hp_.hidden.size();
    for (int h : hp_.hidden) {
        out << ' ' << h;
    }
    out << '\n';
    for (const auto* net : {&actor_, &critic_, &actor_target_, &critic_target_}) {
        out << "net\n";
        put_vec(out, net->params());
    }
    out << "vel\n";
    put_vec(out, actor_opt_.velocity());
    out << "vel\n";
    put_vec(out, critic_opt_.velocity());
    out << "rng " << rng_ << '\n';
    out << "buffer " << buffer_.size() << ' ' << buffer_.cursor() << ' '
        << buffer_.total_pushed() << '\n';
    for (std::size_t i = 0; i < buffer_.size(); ++i) {
        const sched::Transition& t = buffer_.at(i);
        out << t.s.size() << ' ' << (t.terminal ? 1 : 0) << ' ';
        for (auto v : t.s.batteries) put_d(out, v);
        for (auto v : t.s.last_tx_min) put_d(out, v);
        for (auto v : t.a.minutes) put_d(out, v);
        put_d(out, t.r);
        for (auto v : t.s_next.batteries) put_d(out, v);
        for (auto v : t.s_next.last_tx_min) put_d(out, v);
        out << '\n';
    }
}

DdpgAgent DdpgAgent::load(std::istream& in) {
    std::string magic, version;
    in >> magic >> version;
    if (magic != "twincity-ddpg" || version != "v1") {
        throw std::runtime_error("checkpoint: unsupported format");
    }
    expect(in, "n_devices");
    int n = 0;
    in >> n;
    expect(in, "hp");
    Hyperparams hp;
    hp.learning_rate = get_d(in);
    hp.actor_learning_rate = get_d(in);
    hp.momentum = get_d(in);
    hp.gamma = get_d(in);
    in >> hp.batch_size;
    hp.tau = get_d(in);
    in >> hp.buffer_capacity;
    hp.epsilon_start = get_d(in);
    hp.epsilon_final = get_d(in);
    hp.epsilon_decay_fraction = get_d(in);
    hp.reward_scale = get_d(in);
    std::string mode;
    in >> hp.updates_per_step >> mode;
    hp.exploration =
        mode == "gaussian" ? ExplorationMode::GaussianNoise : ExplorationMode::EpsilonGreedy;
    hp.gaussian_sigma_minutes = get_d(in);
    expect(in, "hidden");
    std::size_t hn = 0;
    in >> hn;
    hp.hidden.assign(hn, 0);
    for (auto& h : hp.hidden) {
        in >> h;
    }

    DdpgAgent agent(n, hp, 0);
    for (Mlp* net : {&agent.actor_, &agent.critic_, &agent.actor_target_,
                     &agent.critic_target_}) {
        expect(in, "net");
        const auto v = get_vec(in);
        if (v.size() != net->param_count()) {
            throw std::runtime_error("checkpoint: parameter count mismatch");
        }
        std::copy(v.begin(), v.end(), net->params().begin());
    }
    for (SgdMomentum* opt : {&agent.actor_opt_, &agent.critic_opt_}) {
        expect(in, "vel");
        const auto v = get_vec(in);
        if (v.size() != opt->velocity().size()) {
            throw std::runtime_error("checkpoint: velocity count mismatch");
        }
        std::copy(v.begin(), v.end(), opt->velocity().begin());
    }
    expect(in, "rng");
    in >> agent.rng_;
    expect(in, "buffer");
    std::size_t size = 0, cursor = 0;
    std::uint64_t pushed = 0;
    in >> size >> cursor >> pushed;
    std::vector<sched::Transition> storage;
    storage.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        std::size_t dim = 0;
        int terminal = 0;
        in >> dim >> terminal;
        sched::Transition t;
        t.terminal = terminal != 0;
        t.s.batteries.resize(dim);
        t.s.last_tx_min.resize(dim);
        t.a.minutes.resize(dim);
        t.s_next.batteries.resize(dim);
        t.s_next.last_tx_min.resize(dim);
        for (auto& v : t.s.batteries) v = get_d(in);
        for (auto& v : t.s.last_tx_min) v = get_d(in);
        for (auto& v : t.a.minutes) v = get_d(in);
        t.r = get_d(in);
        for (auto& v : t.s_next.batteries) v = get_d(in);
        for (auto& v : t.s_next.last_tx_min) v = get_d(in);
        storage.push_back(std::move(t));
    }
    agent.buffer_.restore(std::move(storage), cursor, pushed);
    if (!in) {
        throw std::runtime_error("checkpoint: truncated stream");
    }
    return agent;
}

std::vector<EpisodeRecord> train(sched::ScheduleEnv& env, DdpgAgent& agent,
                                 const TrainOptions& options) {
    if (options.episodes < 0 || options.start_episode < 0 ||
        options.start_episode > options.episodes) {
        throw std::invalid_argument("train: invalid episode range");
    }
    const Hyperparams& hp = agent.hp();
    std::vector<EpisodeRecord> curve;
    for (int ep = options.start_episode; ep < options.episodes; ++ep) {
        if (options.dt_min_schedule) {
            env.set_dt_min(options.dt_min_schedule(ep));
        }
        const double eps = epsilon_at(ep, options.episodes, hp);
        const auto init = options.initial_state
                              ? std::optional<sched::StateVector>(options.initial_state(ep))
                              : std::nullopt;
        const sched::StateVector s = env.reset(init);
        const sched::ActionVector a = agent.select_action(s, eps);
        const sched::StepResult step = env.step(a);

        sched::Transition t;
        t.s = s;
        t.a = a;
        t.r = step.reward.r_total;  // raw reward in the buffer
        t.s_next = step.next;
        t.terminal = true;  // one day per episode; no bootstrap across days
        agent.buffer().push(std::move(t));

        double critic_loss = 0.0;
        if (agent.buffer().size() >= static_cast<std::size_t>(hp.batch_size)) {
            for (int k = 0; k < hp.updates_per_step; ++k) {
                const auto batch = agent.buffer().sample_indices(
                    static_cast<std::size_t>(hp.batch_size), agent.rng());
                critic_loss = agent.critic_update(batch);
                agent.actor_update(batch);
                agent.soft_update_targets(hp.tau);
            }
        }

        EpisodeRecord rec;
        rec.episode = ep;
        rec.r_total = step.reward.r_total;
        rec.r_energy = step.reward.r_energy;
        rec.r_timeliness = step.reward.r_timeliness;
        rec.r_consecutive = step.reward.r_consecutive;
        rec.epsilon = eps;
        rec.critic_loss = critic_loss;
        std::vector<double> delays;
        delays.reserve(step.samples.size());
        for (const auto& sample : step.samples) {
            delays.push_back(sample.d_ms);
        }
        rec.p95_ms = delays.empty() ? 0.0 : netsim::percentile(delays, 95.0);
        rec.consumed_pct = env.net().ledger().total_consumption();
        if (options.on_episode) {
            options.on_episode(rec);
        }
        curve.push_back(rec);
    }
    return curve;
}

}  // namespace twincity::ddpg

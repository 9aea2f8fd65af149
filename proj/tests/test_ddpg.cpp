#include <doctest.h>

#include <cmath>

#include "risfl/ddpg.hpp"
#include "risfl/scenario.hpp"

using namespace risfl;

namespace {

DdpgConfig tiny_config() {
    DdpgConfig cfg;
    cfg.hidden1 = 16;
    cfg.hidden2 = 12;
    cfg.warmup = 32;
    return cfg;
}

Batch make_batch(std::vector<Transition>& storage, DdpgAgent& agent, int count) {
    Rng rng(4242);
    storage.clear();
    for (int k = 0; k < count; ++k) {
        Transition t;
        t.state.resize(agent.state_dim());
        t.next_state.resize(agent.state_dim());
        for (double& v : t.state) v = rng.normal();
        for (double& v : t.next_state) v = rng.normal();
        t.action.resize(agent.action_dim());
        for (std::size_t j = 0; j + 1 < t.action.size(); j += 2) {
            const double theta = rng.uniform(-M_PI, M_PI);
            t.action[j] = std::cos(theta);
            t.action[j + 1] = std::sin(theta);
        }
        t.reward = rng.normal();
        storage.push_back(std::move(t));
    }
    Batch batch;
    for (const auto& t : storage) batch.push_back(&t);
    return batch;
}

}  // namespace

TEST_CASE("state encoding") {
    RateBounds bounds{0.0, 10.0};
    PhaseShiftVector prev = PhaseShiftVector::identity(2);
    const MdpState s = encode_state({10.0, 5.0, 12.0}, prev, bounds);
    CHECK(s.normalized_rates[0] == doctest::Approx(1.0));
    CHECK(s.normalized_rates[1] == doctest::Approx(0.5));
    CHECK(s.normalized_rates[2] == doctest::Approx(1.0));  // clamped
    CHECK(s.prev_phase == std::vector<double>{1.0, 0.0, 1.0, 0.0});
    CHECK(s.to_vector().size() == 3 + 4);

    // phase round trip
    const PhaseShiftVector back = decode_phase(s.prev_phase);
    for (int k = 0; k < 2; ++k) CHECK(back.coefficients[k] == prev.coefficients[k]);

    CHECK_THROWS_AS(encode_state({1.0}, prev, RateBounds{5.0, 5.0}), std::invalid_argument);
}

TEST_CASE("reward oracle") {
    RewardConfig cfg;
    cfg.gamma_penalty = 0.5;
    cfg.thresholds.r_upper = 9.0;
    cfg.thresholds.r_lower = 1.0;
    cfg.plan.construct = {{0, 1}, {0, 2}};
    cfg.plan.deconstruct = {{0, 3}};
    std::map<Edge, double> rates{{{0, 1}, 10.0}, {{0, 2}, 8.0}, {{0, 3}, 2.0}};
    // (10+8) - 2 - 0.5*((9-10)+ + (9-8)+ + (2-1)+) = 15
    CHECK(reward(rates, cfg) == doctest::Approx(15.0));

    SUBCASE("feasible point has zero penalty") {
        rates[{0, 2}] = 9.5;
        rates[{0, 3}] = 0.5;
        const auto breakdown = reward_breakdown(rates, cfg);
        CHECK(breakdown.penalty == doctest::Approx(0.0));
    }
    SUBCASE("gamma 0 keeps only the bonus") {
        cfg.gamma_penalty = 0.0;
        CHECK(reward(rates, cfg) == doctest::Approx(16.0));
    }
    SUBCASE("penalty is never negative") {
        const auto b = reward_breakdown(rates, cfg);
        CHECK(b.penalty >= 0.0);
    }
}

TEST_CASE("action projection") {
    DdpgAgent agent(4, 4, tiny_config(), 3);
    // force the actor to output a fixed raw vector by zeroing all weights and
    // setting output biases
    auto& params = agent.actor().parameters();
    std::fill(params.begin(), params.end(), 0.0);
    // output layer bias = last action_dim entries of the parameter vector
    params[params.size() - 4] = 2.0;
    params[params.size() - 3] = 0.0;
    params[params.size() - 2] = 0.0;
    params[params.size() - 1] = 3.0;

    MdpState s;
    s.normalized_rates = {0.0, 0.0};
    s.prev_phase = {1.0, 0.0};
    const PhaseShiftVector phi = act(agent, s, false);
    CHECK(phi.coefficients[0] == Complex{1.0, 0.0});
    CHECK(phi.coefficients[1] == Complex{0.0, 1.0});

    // determinism without exploration
    const PhaseShiftVector again = act(agent, s, false);
    for (int k = 0; k < 2; ++k) CHECK(again.coefficients[k] == phi.coefficients[k]);

    // zero raw pair maps to 1 + 0j
    params[params.size() - 4] = 0.0;
    params[params.size() - 1] = 0.0;
    const PhaseShiftVector zero = act(agent, s, false);
    CHECK(zero.coefficients[0] == Complex{1.0, 0.0});
    CHECK(zero.coefficients[1] == Complex{1.0, 0.0});
}

TEST_CASE("every explored action stays unit modulus") {
    DdpgAgent agent(10, 8, tiny_config(), 17);
    MdpState s;
    s.normalized_rates = {0.2, 0.4};
    s.prev_phase = std::vector<double>(8, 0.5);
    for (int k = 0; k < 200; ++k) {
        const PhaseShiftVector phi = act(agent, s, true);
        CHECK(phi.max_modulus_error() < 1e-9);
    }
}

TEST_CASE("replay buffer is FIFO with fixed capacity") {
    ReplayBuffer buf(3);
    for (int k = 0; k < 5; ++k) {
        Transition t;
        t.reward = k;
        buf.push(std::move(t));
    }
    CHECK(buf.size() == 3);
    // 0 and 1 evicted; 2,3,4 stay
    std::vector<double> rewards;
    for (int k = 0; k < buf.size(); ++k) rewards.push_back(buf.at(k).reward);
    std::sort(rewards.begin(), rewards.end());
    CHECK(rewards == std::vector<double>{2.0, 3.0, 4.0});
}

TEST_CASE("critic gradient matches central finite differences") {
    DdpgAgent agent(5, 4, tiny_config(), 11);
    std::vector<Transition> storage;
    const Batch batch = make_batch(storage, agent, 8);

    const CriticGradient analytic = critic_gradient(agent, batch);

    auto loss = [&]() {
        double total = 0.0;
        for (const Transition* t : batch) {
            std::vector<double> raw = agent.target_actor().forward(t->next_state);
            for (std::size_t k = 0; k + 1 < raw.size(); k += 2) {
                const Complex p = project_unit({raw[k], raw[k + 1]});
                raw[k] = p.real();
                raw[k + 1] = p.imag();
            }
            std::vector<double> in(t->next_state);
            in.insert(in.end(), raw.begin(), raw.end());
            const double target = t->reward + agent.config().discount *
                                                  agent.target_critic().forward(in)[0];
            std::vector<double> qin(t->state);
            qin.insert(qin.end(), t->action.begin(), t->action.end());
            const double err = agent.critic().forward(qin)[0] - target;
            total += err * err / batch.size();
        }
        return total;
    };

    CHECK(analytic.loss == doctest::Approx(loss()).epsilon(1e-12));
    auto& params = agent.critic().parameters();
    int checked = 0;
    for (std::size_t k = 0; k < params.size(); k += 17) {  // spot-check a spread of params
        const double saved = params[k];
        const double h = 1e-6;
        params[k] = saved + h;
        const double up = loss();
        params[k] = saved - h;
        const double down = loss();
        params[k] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double scale = std::max({std::abs(fd), std::abs(analytic.grad[k]), 1e-6});
        CHECK(std::abs(fd - analytic.grad[k]) / scale < 1e-4);
        ++checked;
    }
    CHECK(checked > 20);
}

TEST_CASE("actor gradient matches central finite differences through the projection") {
    DdpgAgent agent(5, 4, tiny_config(), 19);
    std::vector<Transition> storage;
    const Batch batch = make_batch(storage, agent, 8);

    const ActorGradient analytic = actor_gradient(agent, batch);

    auto objective = [&]() {  // -mean Q(s, project(mu(s)))
        double total = 0.0;
        for (const Transition* t : batch) {
            std::vector<double> raw = agent.actor().forward(t->state);
            for (std::size_t k = 0; k + 1 < raw.size(); k += 2) {
                const Complex p = project_unit({raw[k], raw[k + 1]});
                raw[k] = p.real();
                raw[k + 1] = p.imag();
            }
            std::vector<double> in(t->state);
            in.insert(in.end(), raw.begin(), raw.end());
            total -= agent.critic().forward(in)[0] / batch.size();
        }
        return total;
    };

    auto& params = agent.actor().parameters();
    int checked = 0;
    for (std::size_t k = 0; k < params.size(); k += 13) {
        const double saved = params[k];
        const double h = 1e-6;
        params[k] = saved + h;
        const double up = objective();
        params[k] = saved - h;
        const double down = objective();
        params[k] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double scale = std::max({std::abs(fd), std::abs(analytic.grad[k]), 1e-6});
        CHECK(std::abs(fd - analytic.grad[k]) / scale < 1e-4);
        ++checked;
    }
    CHECK(checked > 20);
}

TEST_CASE("train_step contracts") {
    DdpgAgent agent(5, 4, tiny_config(), 23);
    SUBCASE("skipped below batch size") {
        const auto stats = train_step(agent);
        CHECK(stats.skipped);
    }
    SUBCASE("changes actor parameters when the gradient is nonzero") {
        Rng rng(1);
        for (int k = 0; k < 64; ++k) {
            Transition t;
            t.state.assign(5, rng.normal());
            t.next_state.assign(5, rng.normal());
            t.action = {1.0, 0.0, 0.0, 1.0};
            t.reward = rng.normal();
            agent.replay().push(std::move(t));
        }
        const auto before = agent.actor().parameters();
        const auto stats = train_step(agent);
        CHECK_FALSE(stats.skipped);
        CHECK(agent.actor().parameters() != before);
    }
}

TEST_CASE("terminal-free zero-reward batch with zero target critic") {
    DdpgConfig cfg = tiny_config();
    DdpgAgent agent(4, 2, cfg, 29);
    // zero the target critic so Q' == 0 and y == r == 0
    std::fill(agent.target_critic().parameters().begin(),
              agent.target_critic().parameters().end(), 0.0);
    std::vector<Transition> storage;
    Batch batch = make_batch(storage, agent, 8);
    for (auto& t : storage) t.reward = 0.0;
    const CriticGradient cg = critic_gradient(agent, batch);
    // loss must equal mean Q(s,a)^2
    double expected = 0.0;
    for (const Transition* t : batch) {
        std::vector<double> in(t->state);
        in.insert(in.end(), t->action.begin(), t->action.end());
        const double q = agent.critic().forward(in)[0];
        expected += q * q / batch.size();
    }
    CHECK(cg.loss == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("soft update blends toward the online nets") {
    DdpgAgent agent(4, 2, tiny_config(), 31);
    const auto target_before = agent.target_actor().parameters();
    // perturb the online actor, then blend
    for (double& p : agent.actor().parameters()) p += 1.0;
    soft_update(agent);
    const auto& target_after = agent.target_actor().parameters();
    for (std::size_t k = 0; k < target_after.size(); ++k)
        CHECK(target_after[k] ==
              doctest::Approx(target_before[k] + 0.01 * 1.0).epsilon(1e-9));
}

TEST_CASE("checkpoint round trip") {
    DdpgAgent a(6, 4, tiny_config(), 37);
    DdpgAgent b(6, 4, tiny_config(), 999);
    b.load_checkpoint(a.save_checkpoint());
    CHECK(a.actor().parameters() == b.actor().parameters());
    CHECK(a.critic().parameters() == b.critic().parameters());
    CHECK(a.target_actor().parameters() == b.target_actor().parameters());
    CHECK(a.target_critic().parameters() == b.target_critic().parameters());

    DdpgConfig other = tiny_config();
    other.hidden1 = 8;
    DdpgAgent c(6, 4, other, 1);
    CHECK_THROWS_AS(c.load_checkpoint(a.save_checkpoint()), std::invalid_argument);
}

namespace {

RisEnv two_car_env(int elements, std::uint64_t seed) {
    RisEnv::Scenario sc;
    sc.geometry.car_positions = {{0, 0, 10}, {80, 0, 10}};
    sc.geometry.ris_position = {40, 25, 25};
    sc.geometry.obstructions.push_back(Box{{35, -5, 0}, {45, 5, 30}});  // direct path blocked
    sc.geometry.ris_elements = elements;
    sc.plan.construct = {{0, 1}};
    sc.traffic_bits = 2.5e6;
    sc.r_lower_bps = 1e5;
    sc.lambda_max = 2.0;  // K2 laplacian spectrum {0, 2}
    sc.gamma_penalty = 1.0;
    return RisEnv(sc, seed);
}

}  // namespace

TEST_CASE("training is bit-reproducible and episodes=0 is a no-op") {
    RisEnv env = two_car_env(2, 5150);
    DdpgConfig cfg = tiny_config();
    DdpgAgent agent(env.state_dim(), env.action_dim(), cfg, 606);
    const auto params_before = agent.actor().parameters();
    const TrainCurve empty = train(env, agent, 0, 10);
    CHECK(empty.episodes.empty());
    CHECK(agent.actor().parameters() == params_before);

    RisEnv env_a = two_car_env(2, 5150);
    DdpgAgent agent_a(env_a.state_dim(), env_a.action_dim(), cfg, 606);
    const TrainCurve curve_a = train(env_a, agent_a, 6, 20);

    RisEnv env_b = two_car_env(2, 5150);
    DdpgAgent agent_b(env_b.state_dim(), env_b.action_dim(), cfg, 606);
    const TrainCurve curve_b = train(env_b, agent_b, 6, 20);

    CHECK(curve_a.to_csv() == curve_b.to_csv());
    CHECK(agent_a.actor().parameters() == agent_b.actor().parameters());
    CHECK(agent_a.save_checkpoint() == agent_b.save_checkpoint());
}

TEST_CASE("rate bounds normalize the realized rates into [0,1]") {
    RisEnv env = two_car_env(4, 77);
    CHECK(env.bounds().max_bps > env.bounds().min_bps);
    MdpState s = env.reset(0);
    for (int step = 0; step < 5; ++step) {
        for (double r : s.normalized_rates) {
            CHECK(r >= 0.0);
            CHECK(r <= 1.0);
        }
        std::vector<double> phases;
        Rng rng(step);
        for (int k = 0; k < 4; ++k) phases.push_back(rng.uniform(-M_PI, M_PI));
        s = env.step(PhaseShiftVector::from_phases(phases)).state;
    }
}

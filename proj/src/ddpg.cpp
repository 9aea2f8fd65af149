#include "risfl/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "risfl/spectral.hpp"

namespace risfl {

std::vector<double> MdpState::to_vector() const {
    std::vector<double> v;
    v.reserve(normalized_rates.size() + prev_phase.size());
    v.insert(v.end(), normalized_rates.begin(), normalized_rates.end());
    v.insert(v.end(), prev_phase.begin(), prev_phase.end());
    return v;
}

MdpState encode_state(const std::vector<double>& rates_bps, const PhaseShiftVector& prev,
                      const RateBounds& bounds) {
    if (bounds.max_bps <= bounds.min_bps)
        throw std::invalid_argument("encode_state: rate bounds must satisfy max > min");
    MdpState s;
    s.normalized_rates.reserve(rates_bps.size());
    for (double r : rates_bps) {
        const double z = (r - bounds.min_bps) / (bounds.max_bps - bounds.min_bps);
        s.normalized_rates.push_back(std::clamp(z, 0.0, 1.0));
    }
    s.prev_phase.reserve(2 * prev.coefficients.size());
    for (const auto& c : prev.coefficients) {
        s.prev_phase.push_back(c.real());
        s.prev_phase.push_back(c.imag());
    }
    return s;
}

PhaseShiftVector decode_phase(const std::vector<double>& interleaved) {
    if (interleaved.size() % 2 != 0)
        throw std::invalid_argument("decode_phase: need an even number of entries");
    PhaseShiftVector phi;
    phi.coefficients.reserve(interleaved.size() / 2);
    for (std::size_t k = 0; k + 1 < interleaved.size(); k += 2)
        phi.coefficients.emplace_back(interleaved[k], interleaved[k + 1]);
    return phi;
}

RewardBreakdown reward_breakdown(const std::map<Edge, double>& rates, const RewardConfig& cfg) {
    auto rate_of = [&rates](const Edge& e) {
        const auto it = rates.find(e);
        if (it == rates.end())
            throw std::invalid_argument("reward: no rate supplied for a planned link");
        return it->second;
    };
    RewardBreakdown out;
    for (const auto& e : cfg.plan.construct) {
        const double r = rate_of(e);
        out.bonus += r;
        out.penalty += cfg.gamma_penalty * std::max(cfg.thresholds.r_upper - r, 0.0);
    }
    for (const auto& e : cfg.plan.deconstruct) {
        const double r = rate_of(e);
        out.bonus -= r;
        out.penalty += cfg.gamma_penalty * std::max(r - cfg.thresholds.r_lower, 0.0);
    }
    return out;
}

double reward(const std::map<Edge, double>& rates, const RewardConfig& cfg) {
    return reward_breakdown(rates, cfg).total();
}

void ReplayBuffer::push(Transition t) {
    if (static_cast<int>(items_.size()) < capacity_) {
        items_.push_back(std::move(t));
    } else {
        items_[next_] = std::move(t);  // oldest first
        next_ = (next_ + 1) % capacity_;
    }
}

std::vector<const Transition*> ReplayBuffer::sample(int batch, Rng& rng) const {
    std::vector<const Transition*> out;
    out.reserve(batch);
    for (int k = 0; k < batch; ++k)
        out.push_back(&items_[rng.uniform_index(items_.size())]);
    return out;
}

DdpgAgent::DdpgAgent(int state_dim, int action_dim, const DdpgConfig& cfg, std::uint64_t seed)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      cfg_(cfg),
      rng_(seed),
      sigma_(cfg.noise_sigma),
      actor_({state_dim, cfg.hidden1, cfg.hidden2, action_dim}),
      critic_({state_dim + action_dim, cfg.hidden1, cfg.hidden2, 1}),
      target_actor_(actor_),
      target_critic_(critic_),
      replay_(cfg.replay_capacity) {
    actor_.init(rng_);
    critic_.init(rng_);
    target_actor_.set_parameters(actor_.parameters());
    target_critic_.set_parameters(critic_.parameters());
}

namespace {

std::vector<double> project_pairs(std::vector<double> raw) {
    for (std::size_t k = 0; k + 1 < raw.size(); k += 2) {
        const Complex p = project_unit({raw[k], raw[k + 1]});
        raw[k] = p.real();
        raw[k + 1] = p.imag();
    }
    return raw;
}

// d(projected)/d(raw) for one (x, y) pair; zero near the origin where the
// projection snaps to 1+0j.
void project_pair_backward(double x, double y, double gx, double gy, double& out_x, double& out_y) {
    const double r2 = x * x + y * y;
    const double r = std::sqrt(r2);
    if (r < 1e-12) {
        out_x = 0.0;
        out_y = 0.0;
        return;
    }
    const double inv_r3 = 1.0 / (r2 * r);
    out_x = (y * y * gx - x * y * gy) * inv_r3;
    out_y = (-x * y * gx + x * x * gy) * inv_r3;
}

std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

}  // namespace

PhaseShiftVector act(DdpgAgent& agent, const MdpState& state, bool explore) {
    std::vector<double> raw = agent.actor().forward(state.to_vector());
    if (explore) {
        const double sigma = agent.exploration_sigma();
        for (double& v : raw) v += sigma * agent.rng().normal();
    }
    return decode_phase(project_pairs(std::move(raw)));
}

CriticGradient critic_gradient(DdpgAgent& agent, const Batch& batch) {
    CriticGradient out;
    out.grad.assign(agent.critic().parameter_count(), 0.0);
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    Mlp::Trace target_actor_trace, target_critic_trace, critic_trace;
    for (const Transition* t : batch) {
        const auto next_action =
            project_pairs(agent.target_actor().forward_cached(t->next_state, target_actor_trace));
        const double next_q = agent.target_critic().forward_cached(
            concat(t->next_state, next_action), target_critic_trace)[0];
        const double target = t->reward + agent.config().discount * next_q;

        const double q =
            agent.critic().forward_cached(concat(t->state, t->action), critic_trace)[0];
        const double err = q - target;
        out.loss += err * err * inv_batch;
        const std::vector<double> dq{2.0 * err * inv_batch};
        agent.critic().backward(critic_trace, dq, out.grad);
    }
    return out;
}

ActorGradient actor_gradient(DdpgAgent& agent, const Batch& batch) {
    ActorGradient out;
    out.grad.assign(agent.actor().parameter_count(), 0.0);
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    Mlp::Trace actor_trace, critic_trace;
    std::vector<double> daction;
    for (const Transition* t : batch) {
        const auto raw = agent.actor().forward_cached(t->state, actor_trace);
        const auto action = project_pairs(raw);

        const double q = agent.critic().forward_cached(concat(t->state, action), critic_trace)[0];
        out.objective += q * inv_batch;

        const std::vector<double> dq{-inv_batch};  // minimize -Q
        const auto dinput = agent.critic().backward_input(critic_trace, dq);

        daction.assign(raw.size(), 0.0);
        const std::size_t state_dim = t->state.size();
        for (std::size_t k = 0; k + 1 < raw.size(); k += 2) {
            project_pair_backward(raw[k], raw[k + 1], dinput[state_dim + k],
                                  dinput[state_dim + k + 1], daction[k], daction[k + 1]);
        }
        agent.actor().backward(actor_trace, daction, out.grad);
    }
    return out;
}

TrainStepStats train_step(DdpgAgent& agent) {
    TrainStepStats stats;
    const DdpgConfig& cfg = agent.config();
    if (agent.replay().size() < cfg.batch_size) {
        stats.skipped = true;
        return stats;
    }
    const Batch batch = agent.replay().sample(cfg.batch_size, agent.rng());

    const CriticGradient cg = critic_gradient(agent, batch);
    agent.critic().gradient_step(cg.grad, cfg.critic_lr);
    stats.critic_loss = cg.loss;

    const ActorGradient ag = actor_gradient(agent, batch);
    agent.actor().gradient_step(ag.grad, cfg.actor_lr);
    stats.actor_objective = ag.objective;
    return stats;
}

void soft_update(DdpgAgent& agent) {
    soft_blend(agent.critic().parameters(), agent.target_critic().parameters(),
               agent.config().soft_tau);
    soft_blend(agent.actor().parameters(), agent.target_actor().parameters(),
               agent.config().soft_tau);
}

std::string DdpgAgent::save_checkpoint() const {
    std::ostringstream out;
    out.precision(17);
    out << "risfl-ddpg v1\n";
    auto shapes = [&out](const char* name, const Mlp& net) {
        out << name;
        for (int w : net.widths()) out << " " << w;
        out << "\n";
    };
    shapes("actor", actor_);
    shapes("critic", critic_);
    shapes("target_actor", target_actor_);
    shapes("target_critic", target_critic_);
    out << "params\n";
    for (const Mlp* net : {&actor_, &critic_, &target_actor_, &target_critic_})
        for (double p : net->parameters()) out << p << "\n";
    return out.str();
}

void DdpgAgent::load_checkpoint(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "risfl-ddpg v1")
        throw std::invalid_argument("checkpoint: bad magic line");
    std::vector<Mlp*> nets{&actor_, &critic_, &target_actor_, &target_critic_};
    for (Mlp* net : nets) {
        if (!std::getline(in, line)) throw std::invalid_argument("checkpoint: truncated header");
        std::istringstream ls(line);
        std::string name;
        ls >> name;
        std::vector<int> widths;
        int w;
        while (ls >> w) widths.push_back(w);
        if (widths != net->widths())
            throw std::invalid_argument("checkpoint: shape mismatch in " + name);
    }
    if (!std::getline(in, line) || line != "params")
        throw std::invalid_argument("checkpoint: missing params marker");
    for (Mlp* net : nets) {
        std::vector<double> params(net->parameter_count());
        for (double& p : params) {
            if (!std::getline(in, line)) throw std::invalid_argument("checkpoint: truncated params");
            p = std::stod(line);
        }
        net->set_parameters(params);
    }
}

RisEnv::RisEnv(Scenario scenario, std::uint64_t master_seed)
    : scenario_(std::move(scenario)), master_seed_(master_seed) {
    scenario_.geometry.validate();
    scenario_.params.validate();
    if (scenario_.plan.empty()) throw std::invalid_argument("RisEnv: plan has no links");
    for (const auto& e : scenario_.plan.construct) links_.push_back(e);
    for (const auto& e : scenario_.plan.deconstruct) links_.push_back(e);

    r_upper_bps_ = rate_upper(scenario_.traffic_bits, scenario_.lambda_max);

    const double scale = scenario_.reward_rate_scale;
    reward_cfg_.gamma_penalty = scenario_.gamma_penalty;
    reward_cfg_.plan = scenario_.plan;
    reward_cfg_.thresholds.traffic_bits = scenario_.traffic_bits;
    reward_cfg_.thresholds.r_upper = r_upper_bps_ * scale;
    reward_cfg_.thresholds.r_lower = scenario_.r_lower_bps * scale;

    // Rate normalization bounds: the coherent upper bound |h| + sum |J_k B_k|
    // over a fixed set of calibration draws, with headroom. Deterministic, so
    // every run of a scenario shares the same encoding.
    double max_rate = 0.0;
    Rng calib = Rng(master_seed_).stream(0xca11b);
    for (int draw = 0; draw < 16; ++draw) {
        const ChannelSet ch =
            sample_channels(scenario_.geometry, scenario_.params, calib.stream(draw).seed());
        for (const auto& [i, m] : links_) {
            double best_gain = std::abs(ch.direct_gain(i, m));
            for (int k = 0; k < ch.elements; ++k)
                best_gain += std::abs(ch.ris_to_car[m][k]) * std::abs(ch.car_to_ris[i][k]);
            max_rate = std::max(max_rate, rate_from_gain({best_gain, 0.0}, scenario_.params));
        }
    }
    bounds_.min_bps = 0.0;
    bounds_.max_bps = max_rate * 1.05;

    channels_ = sample_channels(scenario_.geometry, scenario_.params, master_seed_);
    phase_ = PhaseShiftVector::identity(scenario_.geometry.ris_elements);
}

std::map<Edge, double> RisEnv::rates_for(const PhaseShiftVector& phi) const {
    std::map<Edge, double> rates;
    for (const auto& [i, m] : links_)
        rates[{i, m}] = link_rate(channels_, phi, i, m, scenario_.params);
    return rates;
}

MdpState RisEnv::reset_with_seed(std::uint64_t seed) {
    channels_ = sample_channels(scenario_.geometry, scenario_.params, seed);
    phase_ = PhaseShiftVector::identity(scenario_.geometry.ris_elements);
    std::vector<double> rates;
    for (const auto& [i, m] : links_)
        rates.push_back(link_rate(channels_, phase_, i, m, scenario_.params));
    return encode_state(rates, phase_, bounds_);
}

MdpState RisEnv::reset(std::uint64_t episode_index) {
    return reset_with_seed(Rng(master_seed_).stream(1 + episode_index).seed());
}

MdpState RisEnv::reset_eval(std::uint64_t draw_index) {
    return reset_with_seed(Rng(master_seed_).stream(0xe7a1000000ULL + draw_index).seed());
}

RisEnv::StepResult RisEnv::step(const PhaseShiftVector& phi) {
    if (phi.size() != scenario_.geometry.ris_elements)
        throw std::invalid_argument("RisEnv::step: wrong phase vector length");
    phi.validate();
    phase_ = phi;
    StepResult out;
    out.rates_bps = rates_for(phi);

    std::map<Edge, double> rates_scaled;
    std::vector<double> rate_list;
    for (const auto& [i, m] : links_) rate_list.push_back(out.rates_bps.at({i, m}));
    for (const auto& [link, r] : out.rates_bps) rates_scaled[link] = r * scenario_.reward_rate_scale;
    const auto breakdown = reward_breakdown(rates_scaled, reward_cfg_);
    out.reward = breakdown.total();
    out.penalty = breakdown.penalty;
    out.state = encode_state(rate_list, phase_, bounds_);
    return out;
}

std::string TrainCurve::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "episode,mean_reward,penalty_rate\n";
    for (std::size_t e = 0; e < episodes.size(); ++e)
        out << e << "," << episodes[e].mean_reward << "," << episodes[e].penalty_rate << "\n";
    return out.str();
}

TrainCurve train(RisEnv& env, DdpgAgent& agent, int episodes, int steps_per_episode) {
    TrainCurve curve;
    for (int episode = 0; episode < episodes; ++episode) {
        MdpState state = env.reset(episode);
        EpisodeStats stats;
        for (int step = 0; step < steps_per_episode; ++step) {
            const PhaseShiftVector phi = act(agent, state, /*explore=*/true);
            const auto result = env.step(phi);

            Transition t;
            t.state = state.to_vector();
            t.action.reserve(2 * phi.coefficients.size());
            for (const auto& c : phi.coefficients) {
                t.action.push_back(c.real());
                t.action.push_back(c.imag());
            }
            t.reward = result.reward;
            t.next_state = result.state.to_vector();
            agent.replay().push(std::move(t));

            stats.mean_reward += result.reward;
            stats.penalty_rate += result.penalty > 0.0 ? 1.0 : 0.0;
            state = result.state;

            if (agent.replay().size() >= agent.config().warmup) {
                train_step(agent);
                soft_update(agent);
            }
        }
        stats.mean_reward /= steps_per_episode;
        stats.penalty_rate /= steps_per_episode;
        curve.episodes.push_back(stats);
        agent.decay_noise();
    }
    return curve;
}

std::string EvalReport::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "draw,link,target_type,achieved_rate,threshold,met\n";
    for (const auto& d : draws)
        for (const auto& l : d.links)
            out << d.draw << "," << l.link.first << "-" << l.link.second << ","
                << (l.kind == RateTargetKind::kConstructAtLeast ? "construct" : "deconstruct")
                << "," << l.achieved_bps << "," << l.threshold_bps << "," << (l.met ? 1 : 0)
                << "\n";
    return out.str();
}

EvalReport evaluate(RisEnv& env, DdpgAgent& agent, int draws, int rollout_steps, int restarts) {
    EvalReport report;
    const int elements = env.action_dim() / 2;
    int successes = 0;
    for (int draw = 0; draw < draws; ++draw) {
        PhaseShiftVector best_phi = PhaseShiftVector::identity(elements);
        double best_reward = -std::numeric_limits<double>::infinity();
        for (int restart = 0; restart < std::max(1, restarts); ++restart) {
            MdpState state = env.reset_eval(draw);
            if (restart > 0) {
                // deterministic phase ramp: e^{j 2 pi r k / M}
                std::vector<double> ramp(elements);
                for (int k = 0; k < elements; ++k)
                    ramp[k] = 2.0 * M_PI * restart * k / elements;
                state = env.step(PhaseShiftVector::from_phases(ramp)).state;
            }
            for (int step = 0; step < rollout_steps; ++step) {
                const PhaseShiftVector phi = act(agent, state, /*explore=*/false);
                const auto result = env.step(phi);
                if (result.reward > best_reward) {
                    best_reward = result.reward;
                    best_phi = phi;
                }
                state = result.state;
            }
        }
        env.reset_eval(draw);  // rescore best_phi against this draw's channels

        EvalDraw d;
        d.draw = draw;
        d.best_reward = best_reward;
        const auto rates = env.rates_for(best_phi);
        bool all_met = true;
        for (const auto& e : env.scenario().plan.construct) {
            LinkOutcome o{e, RateTargetKind::kConstructAtLeast, rates.at(e), env.r_upper_bps(),
                          rates.at(e) >= env.r_upper_bps()};
            all_met = all_met && o.met;
            d.links.push_back(o);
        }
        for (const auto& e : env.scenario().plan.deconstruct) {
            LinkOutcome o{e, RateTargetKind::kDeconstructAtMost, rates.at(e),
                          env.scenario().r_lower_bps, rates.at(e) <= env.scenario().r_lower_bps};
            all_met = all_met && o.met;
            d.links.push_back(o);
            d.deconstruct_residuals[e] =
                std::abs(effective_gain(env.channels(), best_phi, e.first, e.second));
        }
        d.all_met = all_met;
        if (all_met) ++successes;
        report.draws.push_back(std::move(d));
    }
    report.success_fraction = draws > 0 ? static_cast<double>(successes) / draws : 0.0;
    return report;
}

}  // namespace risfl

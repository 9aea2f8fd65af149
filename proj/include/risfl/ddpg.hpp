#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "risfl/channel.hpp"
#include "risfl/nn.hpp"
#include "risfl/planner.hpp"
#include "risfl/rng.hpp"

namespace risfl {

// MDP state: min-max-normalized link rates followed by the previous phase
// shifts interleaved as (re, im) pairs. Total length n + 2M.
struct MdpState {
    std::vector<double> normalized_rates;
    std::vector<double> prev_phase;

    std::vector<double> to_vector() const;
};

struct RateBounds {
    double min_bps = 0.0;
    double max_bps = 0.0;
};

MdpState encode_state(const std::vector<double>& rates_bps, const PhaseShiftVector& prev,
                      const RateBounds& bounds);

// Inverse of the phase half of encode_state.
PhaseShiftVector decode_phase(const std::vector<double>& interleaved);

// Reward = sum of constructive rates - sum of deconstructive rates
//          - gamma * (shortfall below r_upper + excess above r_lower),
// with [x]+ = max(x, 0). Rates and thresholds share whatever unit the caller
// picks; the environment feeds Mbps to keep network targets conditioned.
struct RewardConfig {
    double gamma_penalty = 1.0;
    RateThresholds thresholds;  // r_upper / r_lower in the caller's rate unit
    LinkPlan plan;
};

struct RewardBreakdown {
    double bonus = 0.0;
    double penalty = 0.0;  // >= 0; zero iff all rate targets met
    double total() const { return bonus - penalty; }
};

RewardBreakdown reward_breakdown(const std::map<Edge, double>& rates, const RewardConfig& cfg);
double reward(const std::map<Edge, double>& rates, const RewardConfig& cfg);

struct DdpgConfig {
    double actor_lr = 1e-4;
    double critic_lr = 1e-4;
    double discount = 0.9;
    double soft_tau = 0.01;
    int replay_capacity = 10000;
    int batch_size = 32;
    // Training starts once the replay holds this many transitions; the
    // literal rule ("memory full") would be replay_capacity.
    int warmup = 1000;
    double noise_sigma = 0.2;
    double noise_decay = 0.999;  // per episode
    int hidden1 = 300;
    int hidden2 = 200;
};

struct Transition {
    std::vector<double> state;
    std::vector<double> action;  // projected phases, interleaved (re, im)
    double reward = 0.0;
    std::vector<double> next_state;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(int capacity) : capacity_(capacity) {}
    void push(Transition t);
    int size() const { return static_cast<int>(items_.size()); }
    int capacity() const { return capacity_; }
    const Transition& at(int idx) const { return items_[idx]; }
    std::vector<const Transition*> sample(int batch, Rng& rng) const;

private:
    int capacity_;
    std::size_t next_ = 0;  // FIFO eviction cursor
    std::vector<Transition> items_;
};

class DdpgAgent {
public:
    // state_dim = n + 2M, action_dim = 2M.
    DdpgAgent(int state_dim, int action_dim, const DdpgConfig& cfg, std::uint64_t seed);

    const DdpgConfig& config() const { return cfg_; }
    int state_dim() const { return state_dim_; }
    int action_dim() const { return action_dim_; }

    Mlp& actor() { return actor_; }
    Mlp& critic() { return critic_; }
    Mlp& target_actor() { return target_actor_; }
    Mlp& target_critic() { return target_critic_; }
    ReplayBuffer& replay() { return replay_; }
    const ReplayBuffer& replay() const { return replay_; }
    Rng& rng() { return rng_; }

    double exploration_sigma() const { return sigma_; }
    void decay_noise() { sigma_ *= cfg_.noise_decay; }

    std::string save_checkpoint() const;
    void load_checkpoint(const std::string& text);

private:
    int state_dim_;
    int action_dim_;
    DdpgConfig cfg_;
    Rng rng_;
    double sigma_;
    Mlp actor_, critic_, target_actor_, target_critic_;
    ReplayBuffer replay_;
};

// Actor forward pass, optional Gaussian exploration noise on the raw output,
// then unit-modulus projection of each (re, im) pair.
PhaseShiftVector act(DdpgAgent& agent, const MdpState& state, bool explore);

struct TrainStepStats {
    double critic_loss = 0.0;
    double actor_objective = 0.0;  // mean Q(s, mu(s)) before the update
    bool skipped = false;          // replay below batch size
};

using Batch = std::vector<const Transition*>;

struct CriticGradient {
    std::vector<double> grad;  // of the mean squared Bellman error
    double loss = 0.0;
};

struct ActorGradient {
    std::vector<double> grad;  // of -mean Q(s, project(mu(s))); descend to ascend Q
    double objective = 0.0;
};

// Gradient of mean_i (y_i - Q(s_i, a_i))^2 with y_i = r_i + discount *
// Q'(s'_i, mu'(s'_i)) held fixed.
CriticGradient critic_gradient(DdpgAgent& agent, const Batch& batch);

// Deterministic policy gradient through the critic and the unit-modulus
// projection.
ActorGradient actor_gradient(DdpgAgent& agent, const Batch& batch);

// One critic regression step toward the Bellman target and one
// deterministic-policy-gradient ascent step on the actor, both plain SGD.
TrainStepStats train_step(DdpgAgent& agent);

void soft_update(DdpgAgent& agent);

// Fixed-channel rate environment: an episode freezes one channel draw
// (quasi-static fading), the agent reshapes the phase vector step by step and
// is rewarded on the plan's rate targets. Rates are fed to the networks and
// the reward in Mbps.
class RisEnv {
public:
    struct Scenario {
        Geometry geometry;
        ChannelParams params;
        LinkPlan plan;
        double traffic_bits = 0.0;
        double r_lower_bps = 0.0;
        double lambda_max = 0.0;  // of the revised topology; sets r_upper
        double gamma_penalty = 1.0;
        int episode_steps = 40;
        // Rate unit fed to the reward and the networks; 1e-7 puts rewards at
        // O(1) so the critic's Q targets stay well conditioned.
        double reward_rate_scale = 1e-7;
    };

    RisEnv(Scenario scenario, std::uint64_t master_seed);

    int link_count() const { return static_cast<int>(links_.size()); }
    int state_dim() const { return link_count() + 2 * scenario_.geometry.ris_elements; }
    int action_dim() const { return 2 * scenario_.geometry.ris_elements; }
    const Scenario& scenario() const { return scenario_; }
    const RewardConfig& reward_config() const { return reward_cfg_; }
    const RateBounds& bounds() const { return bounds_; }
    double r_upper_bps() const { return r_upper_bps_; }

    // Draw the episode's channels and reset phases to identity.
    MdpState reset(std::uint64_t episode_index);
    // Held-out draws use a disjoint seed stream.
    MdpState reset_eval(std::uint64_t draw_index);

    struct StepResult {
        MdpState state;
        double reward = 0.0;
        double penalty = 0.0;
        std::map<Edge, double> rates_bps;
    };
    StepResult step(const PhaseShiftVector& phi);

    const ChannelSet& channels() const { return channels_; }
    std::map<Edge, double> rates_for(const PhaseShiftVector& phi) const;

private:
    MdpState reset_with_seed(std::uint64_t seed);

    Scenario scenario_;
    std::uint64_t master_seed_;
    std::vector<Edge> links_;
    double r_upper_bps_ = 0.0;
    RewardConfig reward_cfg_;  // thresholds in Mbps
    RateBounds bounds_;
    ChannelSet channels_;
    PhaseShiftVector phase_;
};

struct EpisodeStats {
    double mean_reward = 0.0;
    double penalty_rate = 0.0;  // fraction of steps with a nonzero penalty
};

struct TrainCurve {
    std::vector<EpisodeStats> episodes;
    std::string to_csv() const;  // episode,mean_reward,penalty_rate
};

TrainCurve train(RisEnv& env, DdpgAgent& agent, int episodes, int steps_per_episode);

struct LinkOutcome {
    Edge link;
    RateTargetKind kind;
    double achieved_bps = 0.0;
    double threshold_bps = 0.0;
    bool met = false;
};

struct EvalDraw {
    std::uint64_t draw = 0;
    std::vector<LinkOutcome> links;
    bool all_met = false;
    double best_reward = 0.0;
    // |effective gain| on each deconstructive link under the best phases.
    std::map<Edge, double> deconstruct_residuals;
};

struct EvalReport {
    std::vector<EvalDraw> draws;
    double success_fraction = 0.0;
    std::string to_csv() const;  // draw,link,target_type,achieved_rate,threshold,met
};

// Greedy rollout (no exploration) on held-out channel draws; the phase vector
// with the best reward along the rollout is scored against the plan targets.
// Each restart seeds the rollout from a different deterministic phase ramp so
// the policy's iterative refinement explores several basins.
EvalReport evaluate(RisEnv& env, DdpgAgent& agent, int draws, int rollout_steps,
                    int restarts = 1);

}  // namespace risfl

#pragma once

#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "figmn/data.hpp"
#include "figmn/inference.hpp"
#include "figmn/learner_fast.hpp"

// Classic-control demonstration: cart-pole and mountain-car environments with
// a Q-learning agent whose action-value function is the fast learner. The
// dynamics are deterministic given state and action; only episode starts are
// randomized.

namespace figmn::rl {

enum class Task { cart_pole, mountain_car };

struct EnvSpec {
  Task task = Task::cart_pole;
  int state_dim = 0;
  int action_count = 0;
  int max_steps = 0;            // per-episode truncation (not a terminal event)
  double solve_threshold = 0;   // rolling mean episode reward
  int solve_window = 100;
  Vec state_std;                // scale estimates handed to the learner
};

inline EnvSpec make_env(Task task) {
  EnvSpec env;
  env.task = task;
  if (task == Task::cart_pole) {
    env.state_dim = 4;  // cart position/speed, pole angle/angular velocity
    env.action_count = 2;
    env.max_steps = 200;
    env.solve_threshold = 195.0;
    env.state_std = Vec(4);
    env.state_std << 1.0, 1.0, 0.12, 1.0;
  } else {
    env.state_dim = 2;  // car position and speed
    env.action_count = 3;
    env.max_steps = 2000;
    env.solve_threshold = -110.0;
    env.state_std = Vec(2);
    env.state_std << 0.5, 0.04;
  }
  return env;
}

struct Transition {
  Vec state;
  int action = 0;
  double reward = 0.0;
  Vec next_state;
  bool terminal = false;
};

inline Vec env_reset(const EnvSpec& env, std::mt19937_64& rng) {
  if (env.task == Task::cart_pole) {
    std::uniform_real_distribution<double> init(-0.05, 0.05);
    Vec s(4);
    for (int i = 0; i < 4; ++i) s[i] = init(rng);
    return s;
  }
  std::uniform_real_distribution<double> init(-0.6, -0.4);
  Vec s(2);
  s << init(rng), 0.0;
  return s;
}

// Standard published dynamics. Cart-pole: pole-on-cart Euler integration at
// 0.02 s, reward +1 per step, terminal when |x| > 2.4 or |angle| > 12 deg.
// Mountain car: classic position/velocity update, reward -1 per step,
// terminal at the hilltop (position >= 0.5).
inline Transition env_step(const EnvSpec& env, const Vec& state, int action) {
  if (action < 0 || action >= env.action_count)
    throw std::invalid_argument("env_step: invalid action");
  if (state.size() != env.state_dim)
    throw std::invalid_argument("env_step: state dimension mismatch");
  Transition tr;
  tr.state = state;
  tr.action = action;

  if (env.task == Task::cart_pole) {
    constexpr double gravity = 9.8;
    constexpr double mass_cart = 1.0;
    constexpr double mass_pole = 0.1;
    constexpr double total_mass = mass_cart + mass_pole;
    constexpr double length = 0.5;  // half the pole
    constexpr double polemass_length = mass_pole * length;
    constexpr double force_mag = 10.0;
    constexpr double tau = 0.02;
    constexpr double angle_limit = 12.0 * 3.14159265358979323846 / 180.0;
    constexpr double x_limit = 2.4;

    double x = state[0], x_dot = state[1], theta = state[2],
           theta_dot = state[3];
    const double force = action == 1 ? force_mag : -force_mag;
    const double cos_t = std::cos(theta);
    const double sin_t = std::sin(theta);
    const double temp =
        (force + polemass_length * theta_dot * theta_dot * sin_t) / total_mass;
    const double theta_acc =
        (gravity * sin_t - cos_t * temp) /
        (length * (4.0 / 3.0 - mass_pole * cos_t * cos_t / total_mass));
    const double x_acc = temp - polemass_length * theta_acc * cos_t / total_mass;
    x += tau * x_dot;
    x_dot += tau * x_acc;
    theta += tau * theta_dot;
    theta_dot += tau * theta_acc;

    tr.next_state = Vec(4);
    tr.next_state << x, x_dot, theta, theta_dot;
    tr.reward = 1.0;
    tr.terminal = std::abs(x) > x_limit || std::abs(theta) > angle_limit;
    return tr;
  }

  constexpr double min_pos = -1.2;
  constexpr double max_pos = 0.6;
  constexpr double max_speed = 0.07;
  constexpr double goal_pos = 0.5;
  double pos = state[0], vel = state[1];
  vel += (action - 1) * 0.001 - 0.0025 * std::cos(3.0 * pos);
  vel = std::clamp(vel, -max_speed, max_speed);
  pos += vel;
  pos = std::clamp(pos, min_pos, max_pos);
  if (pos <= min_pos && vel < 0.0) vel = 0.0;
  tr.next_state = Vec(2);
  tr.next_state << pos, vel;
  tr.reward = -1.0;
  tr.terminal = pos >= goal_pos;
  return tr;
}

struct AgentConfig {
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_decay = 0.995;  // multiplicative, per episode
  double epsilon_floor = 0.05;
  double q_init = 0.0;           // prediction of the still-empty mixture
  double delta = 0.1;
  double novelty_p = 0.999;      // beta = 1 - novelty_p
  double q_std = 50.0;           // scale estimate for the action-value slots
  int episode_cap = 1000;
  bool random_policy = false;    // baseline switch: uniform actions, no learning
  bool pruning = false;
};

// Shipped defaults per task, tuned only to clear the loose solve bounds.
inline AgentConfig default_agent_config(const EnvSpec& env) {
  AgentConfig cfg;
  if (env.task == Task::cart_pole) {
    cfg.episode_cap = 1000;
    cfg.q_std = 50.0;
  } else {
    cfg.episode_cap = 2000;
    cfg.q_std = 50.0;
  }
  return cfg;
}

// Q approximator: one mixture over the joint [state ; action-value] vector.
// Action values are the conditional means of the trailing action_count
// dimensions given the state dimensions.
struct Agent {
  EnvSpec env;
  AgentConfig cfg;
  Mixture mixture;
  Partition part;
};

inline Agent make_agent(const EnvSpec& env, const AgentConfig& cfg) {
  Agent agent;
  agent.env = env;
  agent.cfg = cfg;
  const int dim = env.state_dim + env.action_count;
  LearnerConfig lc;
  lc.delta = cfg.delta;
  lc.beta = 1.0 - cfg.novelty_p;
  lc.pruning_enabled = cfg.pruning;
  lc.dataset_std = Vec(dim);
  for (int i = 0; i < env.state_dim; ++i) lc.dataset_std[i] = env.state_std[i];
  for (int a = 0; a < env.action_count; ++a)
    lc.dataset_std[env.state_dim + a] = cfg.q_std;
  lc.representation = Representation::precision;
  agent.mixture = Mixture(lc);
  std::vector<int> targets(env.action_count);
  for (int a = 0; a < env.action_count; ++a) targets[a] = env.state_dim + a;
  agent.part = make_partition(dim, std::move(targets));
  return agent;
}

inline Vec q_values(const Agent& agent, const Vec& state) {
  if (agent.mixture.components.empty())
    return Vec::Constant(agent.env.action_count, agent.cfg.q_init);
  return predict(agent.mixture, agent.part, state).target_mean;
}

inline int greedy_action(const Agent& agent, const Vec& state) {
  const Vec q = q_values(agent, state);
  int best = 0;
  for (int a = 1; a < agent.env.action_count; ++a)
    if (q[a] > q[best]) best = a;
  return best;
}

// One Q-learning backup: the taken action's slot carries the TD target
// r + gamma max_a Q(s', a) (r alone when terminal); the other slots carry the
// agent's own current predictions, so only the taken action moves.
inline void agent_step(Agent& agent, const Transition& tr) {
  double target = tr.reward;
  if (!tr.terminal && agent.cfg.gamma != 0.0)
    target += agent.cfg.gamma * q_values(agent, tr.next_state).maxCoeff();
  Vec slots = q_values(agent, tr.state);
  slots[tr.action] = target;
  Vec joint(agent.env.state_dim + agent.env.action_count);
  joint << tr.state, slots;
  step_fast(agent.mixture, joint);
}

struct EpisodeRow {
  int episode = 0;
  double reward = 0.0;
  double epsilon = 0.0;
  int components = 0;
};

struct RunResult {
  std::vector<EpisodeRow> episodes;
  int episodes_to_solve = -1;   // episodes consumed when the window criterion
                                // first held; -1 when the cap hit first
  int first_goal_episode = -1;  // first goal event (mountain car: hilltop;
                                // cart-pole: full-length episode), 0-based
  bool solved() const { return episodes_to_solve >= 0; }
};

// Episodes with epsilon-greedy exploration until the rolling-window solve
// criterion holds or the episode cap hits. Deterministic under the seed.
inline RunResult run_task(const EnvSpec& env, const AgentConfig& cfg,
                          std::uint64_t seed) {
  if (cfg.episode_cap < 1) throw ConfigError("run_task: episode cap required");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> random_action(0, env.action_count - 1);
  Agent agent = make_agent(env, cfg);
  double epsilon = cfg.epsilon_start;

  RunResult out;
  double window_sum = 0.0;
  for (int episode = 0; episode < cfg.episode_cap; ++episode) {
    Vec state = env_reset(env, rng);
    double total = 0.0;
    bool goal = false;
    for (int t = 0; t < env.max_steps; ++t) {
      int action;
      if (cfg.random_policy)
        action = random_action(rng);
      else if (unit(rng) < epsilon)
        action = random_action(rng);
      else
        action = greedy_action(agent, state);
      const Transition tr = env_step(env, state, action);
      total += tr.reward;
      if (!cfg.random_policy) agent_step(agent, tr);
      state = tr.next_state;
      if (tr.terminal) {
        goal = env.task == Task::mountain_car;
        break;
      }
      if (t + 1 == env.max_steps && env.task == Task::cart_pole) goal = true;
    }

    out.episodes.push_back(
        {episode, total, epsilon, static_cast<int>(agent.mixture.size())});
    if (goal && out.first_goal_episode < 0) out.first_goal_episode = episode;

    window_sum += total;
    if (episode >= env.solve_window)
      window_sum -= out.episodes[episode - env.solve_window].reward;
    if (episode + 1 >= env.solve_window &&
        window_sum / env.solve_window >= env.solve_threshold) {
      out.episodes_to_solve = episode + 1;
      break;
    }
    epsilon = std::max(cfg.epsilon_floor, epsilon * cfg.epsilon_decay);
  }
  return out;
}

inline void write_episode_csv(const RunResult& result, std::ostream& out) {
  out << "episode,reward,epsilon,components\n";
  for (const auto& row : result.episodes)
    out << row.episode << ',' << format_real(row.reward) << ','
        << format_real(row.epsilon) << ',' << row.components << '\n';
}

}  // namespace figmn::rl

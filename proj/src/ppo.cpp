// Copyright 2026 The fedtwin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fedtwin/ppo.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace fedtwin {

namespace {
constexpr double kHalfLogTwoPi = 0.91893853320467274178;  // 0.5*ln(2*pi)
}

GaussianPolicy::GaussianPolicy(int state_dim, int action_dim,
                               const std::vector<int>& hidden, double initial_std,
                               Rng& rng) {
  std::vector<int> sizes;
  sizes.push_back(state_dim);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(action_dim);
  mean = Mlp(sizes, rng);
  log_std = Eigen::VectorXd::Constant(action_dim, std::log(initial_std));
}

Eigen::VectorXd GaussianPolicy::sample(const Eigen::VectorXd& state, Rng& rng,
                                       double* log_prob_out) const {
  const Eigen::VectorXd mu = mean.forward(state);
  Eigen::VectorXd action(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    action[i] = mu[i] + std::exp(log_std[i]) * rng.normal();
  }
  if (log_prob_out != nullptr) *log_prob_out = log_prob(state, action);
  return action;
}

Eigen::VectorXd GaussianPolicy::mean_action(const Eigen::VectorXd& state) const {
  return mean.forward(state);
}

double GaussianPolicy::log_prob(const Eigen::VectorXd& state,
                                const Eigen::VectorXd& action) const {
  const Eigen::VectorXd mu = mean.forward(state);
  double lp = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double z = (action[i] - mu[i]) * std::exp(-log_std[i]);
    lp += -0.5 * z * z - log_std[i] - kHalfLogTwoPi;
  }
  return lp;
}

Eigen::VectorXd GaussianPolicy::flatten_parameters() const {
  const Eigen::VectorXd net = mean.flatten_parameters();
  Eigen::VectorXd flat(net.size() + log_std.size());
  flat << net, log_std;
  return flat;
}

void GaussianPolicy::unflatten_parameters(const Eigen::VectorXd& flat) {
  const Eigen::Index net = static_cast<Eigen::Index>(mean.parameter_count());
  if (flat.size() != net + log_std.size()) {
    throw std::invalid_argument("policy parameter vector size mismatch");
  }
  mean.unflatten_parameters(flat.head(net));
  log_std = flat.tail(log_std.size());
}

PpoAgent::PpoAgent(std::string id, int state_dim, int action_dim,
                   const PpoConfig& cfg, Rng& init_rng)
    : config(cfg), id_(std::move(id)) {
  policy = GaussianPolicy(state_dim, action_dim, cfg.hidden_sizes,
                          cfg.initial_action_std, init_rng);
  std::vector<int> critic_sizes;
  critic_sizes.push_back(state_dim);
  critic_sizes.insert(critic_sizes.end(), cfg.hidden_sizes.begin(),
                      cfg.hidden_sizes.end());
  critic_sizes.push_back(1);
  critic = Mlp(critic_sizes, init_rng);
  actor_optimizer = Adam(policy.flatten_parameters().size(), cfg.learning_rate);
  critic_optimizer = Adam(static_cast<Eigen::Index>(critic.parameter_count()),
                          cfg.learning_rate);
}

Eigen::VectorXd PpoAgent::act(const Eigen::VectorXd& state, Rng& rng,
                              double* log_prob_out) const {
  return policy.sample(state, rng, log_prob_out);
}

double PpoAgent::value(const Eigen::VectorXd& state) const {
  return critic.forward(state)[0];
}

std::vector<double> rewards_to_go(const std::vector<Transition>& trajectory,
                                  double discount) {
  const int n = static_cast<int>(trajectory.size());
  std::vector<double> j(n, 0.0);
  double running = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    const bool episode_end = t == n - 1 || trajectory[t + 1].first_in_episode;
    running = trajectory[t].reward + (episode_end ? 0.0 : discount * running);
    j[t] = running;
  }
  return j;
}

PpoLosses ppo_losses(const PpoAgent& agent,
                     const std::vector<Transition>& trajectory) {
  PpoLosses out;
  out.rewards_to_go = rewards_to_go(trajectory, agent.config.discount);
  const double hi = 1.0 + agent.config.clip_epsilon;
  const double lo = 1.0 - agent.config.clip_epsilon;

  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    const Transition& tr = trajectory[t];
    const double v = agent.value(tr.state);
    const double adv = out.rewards_to_go[t] - v;
    out.advantages.push_back(adv);
    out.critic_loss += (v - out.rewards_to_go[t]) * (v - out.rewards_to_go[t]);

    const double lp_new = agent.policy.log_prob(tr.state, tr.action);
    if (!std::isfinite(lp_new) || !std::isfinite(tr.log_prob)) {
      throw std::domain_error("non-finite action log-density");
    }
    const double ratio = std::exp(lp_new - tr.log_prob);
    out.ratios.push_back(ratio);
    const double clipped = std::min(std::max(ratio, lo), hi);
    out.actor_objective += adv * std::min(ratio, clipped);
  }
  return out;
}

void ppo_loss_gradients(const PpoAgent& agent,
                        const std::vector<Transition>& trajectory,
                        Eigen::VectorXd* actor_objective_grad,
                        Eigen::VectorXd* critic_loss_grad) {
  const std::vector<double> j = rewards_to_go(trajectory, agent.config.discount);
  const double hi = 1.0 + agent.config.clip_epsilon;

  MlpGradients mean_grads = agent.policy.mean.zero_gradients();
  Eigen::VectorXd log_std_grad = Eigen::VectorXd::Zero(agent.policy.log_std.size());
  MlpGradients critic_grads = agent.critic.zero_gradients();

  Mlp::Tape tape;
  for (std::size_t t = 0; t < trajectory.size(); ++t) {
    const Transition& tr = trajectory[t];

    const double v = agent.critic.forward(tr.state, &tape)[0];
    const double adv = j[t] - v;
    agent.critic.backward(tape, Eigen::VectorXd::Constant(1, 2.0 * (v - j[t])),
                          &critic_grads);

    const Eigen::VectorXd mu = agent.policy.mean.forward(tr.state, &tape);
    double lp_new = 0.0;
    Eigen::ArrayXd z(mu.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      z[i] = (tr.action[i] - mu[i]) * std::exp(-agent.policy.log_std[i]);
      lp_new += -0.5 * z[i] * z[i] - agent.policy.log_std[i] - kHalfLogTwoPi;
    }
    if (!std::isfinite(lp_new) || !std::isfinite(tr.log_prob)) {
      throw std::domain_error("non-finite action log-density");
    }
    const double ratio = std::exp(lp_new - tr.log_prob);

    // d/dtheta [A*min(ratio, clip(ratio))] = A * ratio * dlogp/dtheta on the
    // unclipped branch (ratio <= 1+eps, where min tracks ratio), zero beyond.
    if (ratio <= hi) {
      const double coef = adv * ratio;
      Eigen::VectorXd dmu(mu.size());
      for (Eigen::Index i = 0; i < mu.size(); ++i) {
        const double inv_sigma = std::exp(-agent.policy.log_std[i]);
        dmu[i] = coef * z[i] * inv_sigma;            // dlogp/dmu_i
        log_std_grad[i] += coef * (z[i] * z[i] - 1.0);  // dlogp/dlog_std_i
      }
      agent.policy.mean.backward(tape, dmu, &mean_grads);
    }
  }

  Eigen::VectorXd mean_flat = Mlp::flatten_gradients(mean_grads);
  actor_objective_grad->resize(mean_flat.size() + log_std_grad.size());
  *actor_objective_grad << mean_flat, log_std_grad;
  *critic_loss_grad = Mlp::flatten_gradients(critic_grads);
}

PpoLosses update_agent(PpoAgent& agent) {
  if (agent.buffer.empty()) return {};
  PpoLosses losses = ppo_losses(agent, agent.buffer);

  Eigen::VectorXd actor_grad;
  Eigen::VectorXd critic_grad;
  ppo_loss_gradients(agent, agent.buffer, &actor_grad, &critic_grad);

  Eigen::VectorXd actor_params = agent.policy.flatten_parameters();
  agent.actor_optimizer.step(actor_params, (-actor_grad).eval());
  agent.policy.unflatten_parameters(actor_params);

  Eigen::VectorXd critic_params = agent.critic.flatten_parameters();
  agent.critic_optimizer.step(critic_params, critic_grad);
  agent.critic.unflatten_parameters(critic_params);

  agent.buffer.clear();
  return losses;
}

}  // namespace fedtwin

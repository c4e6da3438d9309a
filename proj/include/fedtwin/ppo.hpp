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
//
// Proximal policy optimization over the small dense networks in mlp.hpp.
// The actor is a diagonal Gaussian over its raw output vector with a
// state-independent learnable log standard deviation; downstream decoders
// map raw samples to discrete decisions, so densities stay well-defined.

#ifndef FEDTWIN_PPO_HPP_
#define FEDTWIN_PPO_HPP_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fedtwin/mlp.hpp"
#include "fedtwin/rng.hpp"

namespace fedtwin {

struct PpoConfig {
  double clip_epsilon = 0.2;
  double learning_rate = 3e-4;
  double discount = 0.92;          // per-frame reward discount
  double initial_action_std = 0.5;
  std::vector<int> hidden_sizes = {64, 64};
};

// One frame's experience. `action` is the raw Gaussian sample; `log_prob` is
// the behavior policy's density at collection time.
struct Transition {
  Eigen::VectorXd state;
  Eigen::VectorXd action;
  double reward = 0.0;
  Eigen::VectorXd next_state;
  double log_prob = 0.0;
  bool first_in_episode = false;
};

// Diagonal Gaussian actor: mean from an Mlp, per-dimension standard
// deviation exp(log_std) shared across states.
class GaussianPolicy {
 public:
  GaussianPolicy() = default;
  GaussianPolicy(int state_dim, int action_dim, const std::vector<int>& hidden,
                 double initial_std, Rng& rng);

  Eigen::VectorXd sample(const Eigen::VectorXd& state, Rng& rng,
                         double* log_prob_out) const;
  Eigen::VectorXd mean_action(const Eigen::VectorXd& state) const;
  double log_prob(const Eigen::VectorXd& state, const Eigen::VectorXd& action) const;

  // Flat parameter order: mean-network parameters, then log_std.
  Eigen::VectorXd flatten_parameters() const;
  void unflatten_parameters(const Eigen::VectorXd& flat);

  Mlp mean;
  Eigen::VectorXd log_std;
};

struct PpoLosses {
  double actor_objective = 0.0;  // maximized
  double critic_loss = 0.0;      // minimized
  std::vector<double> rewards_to_go;
  std::vector<double> advantages;
  std::vector<double> ratios;
};

class PpoAgent {
 public:
  PpoAgent() = default;
  PpoAgent(std::string id, int state_dim, int action_dim, const PpoConfig& cfg,
           Rng& init_rng);

  const std::string& id() const { return id_; }
  int state_dim() const { return policy.mean.input_size(); }
  int action_dim() const { return policy.mean.output_size(); }

  Eigen::VectorXd act(const Eigen::VectorXd& state, Rng& rng,
                      double* log_prob_out) const;
  double value(const Eigen::VectorXd& state) const;

  GaussianPolicy policy;
  Mlp critic;
  PpoConfig config;
  Adam actor_optimizer;
  Adam critic_optimizer;
  std::vector<Transition> buffer;

 private:
  std::string id_;
};

// Tail-sums of discounted rewards, restarting at episode boundaries:
// J(t) = r_t + discount * J(t+1) within an episode.
std::vector<double> rewards_to_go(const std::vector<Transition>& trajectory,
                                  double discount);

// Actor objective sum_t A_t * min(ratio_t, clip(ratio_t, 1-eps, 1+eps)) with
// ratio_t the density ratio of the agent's current policy to the stored
// behavior density, A_t = J_t - V(s_t); critic loss sum_t (V(s_t) - J_t)^2.
// Throws std::domain_error if any stored or recomputed log-density is
// non-finite.
PpoLosses ppo_losses(const PpoAgent& agent,
                     const std::vector<Transition>& trajectory);

// Analytic gradients of the two scalars above, each with respect to its own
// network's flat parameters (advantages are constants for the actor).
void ppo_loss_gradients(const PpoAgent& agent,
                        const std::vector<Transition>& trajectory,
                        Eigen::VectorXd* actor_objective_grad,
                        Eigen::VectorXd* critic_loss_grad);

// One optimizer step per network over the agent's buffer — ascending the
// actor objective, descending the critic loss — then clears the buffer.
// Returns the losses evaluated before the step. No-op on an empty buffer.
PpoLosses update_agent(PpoAgent& agent);

}  // namespace fedtwin

#endif  // FEDTWIN_PPO_HPP_

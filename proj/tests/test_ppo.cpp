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
// Policy-optimization checks: analytic gradients against central finite
// differences, the discounted tail sums, clip-branch arithmetic, and the
// optimizer's first-step behavior.

#include "fedtwin/ppo.hpp"

#include <cmath>
#include <vector>

#include <doctest.h>

#include "fedtwin/mlp.hpp"
#include "fedtwin/rng.hpp"

namespace fedtwin {
namespace {

PpoAgent make_agent(int state_dim, int action_dim,
                    const std::vector<int>& hidden, std::uint64_t seed) {
  PpoConfig cfg;
  cfg.hidden_sizes = hidden;
  Rng rng(seed);
  return PpoAgent("test", state_dim, action_dim, cfg, rng);
}

// Random trajectory sampled from the agent's own policy (ratios start at 1,
// comfortably inside the clip band), with a mid-trajectory episode restart.
std::vector<Transition> make_trajectory(const PpoAgent& agent, int len,
                                        std::uint64_t seed,
                                        double log_prob_shift = 0.0) {
  Rng rng(seed);
  std::vector<Transition> traj(len);
  for (int t = 0; t < len; ++t) {
    Transition& tr = traj[t];
    tr.state = Eigen::VectorXd::NullaryExpr(
        agent.state_dim(), [&](Eigen::Index) { return rng.uniform(-1.0, 1.0); });
    tr.action = agent.policy.sample(tr.state, rng, &tr.log_prob);
    tr.log_prob += log_prob_shift;
    tr.reward = rng.uniform(-2.0, 2.0);
    tr.next_state = tr.state;
    tr.first_in_episode = t == 0 || t == len / 2;
  }
  return traj;
}

double relative_gap(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(1e-12, b.norm());
}

// Central finite differences of a scalar functional of the agent.
template <typename GetParams, typename SetParams, typename Loss>
Eigen::VectorXd finite_difference(GetParams get, SetParams set, Loss loss,
                                  double h) {
  const Eigen::VectorXd base = get();
  Eigen::VectorXd grad(base.size());
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    Eigen::VectorXd p = base;
    p[i] = base[i] + h;
    set(p);
    const double up = loss();
    p[i] = base[i] - h;
    set(p);
    const double down = loss();
    grad[i] = (up - down) / (2.0 * h);
  }
  set(base);
  return grad;
}

void check_gradients(PpoAgent& agent, const std::vector<Transition>& traj,
                     double tol) {
  Eigen::VectorXd actor_grad, critic_grad;
  ppo_loss_gradients(agent, traj, &actor_grad, &critic_grad);

  const double h = 1e-6;
  const Eigen::VectorXd actor_fd = finite_difference(
      [&] { return agent.policy.flatten_parameters(); },
      [&](const Eigen::VectorXd& p) { agent.policy.unflatten_parameters(p); },
      [&] { return ppo_losses(agent, traj).actor_objective; }, h);
  const Eigen::VectorXd critic_fd = finite_difference(
      [&] { return agent.critic.flatten_parameters(); },
      [&](const Eigen::VectorXd& p) { agent.critic.unflatten_parameters(p); },
      [&] { return ppo_losses(agent, traj).critic_loss; }, h);

  REQUIRE(actor_grad.size() == actor_fd.size());
  REQUIRE(critic_grad.size() == critic_fd.size());
  CHECK(relative_gap(actor_grad, actor_fd) < tol);
  CHECK(relative_gap(critic_grad, critic_fd) < tol);
}

TEST_CASE("discounted tails restart at episode boundaries") {
  std::vector<Transition> traj(5);
  for (int t = 0; t < 5; ++t) {
    traj[t].reward = 2.0;
    traj[t].first_in_episode = t == 0 || t == 3;
  }
  const std::vector<double> j = rewards_to_go(traj, 0.92);
  REQUIRE(j.size() == 5);
  // Three-step episode with constant reward r: (1 + 0.92 + 0.92^2) r.
  CHECK(j[0] == doctest::Approx(2.7664 * 2.0).epsilon(1e-12));
  CHECK(j[1] == doctest::Approx(1.92 * 2.0).epsilon(1e-12));
  CHECK(j[2] == doctest::Approx(2.0).epsilon(1e-12));
  // Second episode: two steps.
  CHECK(j[3] == doctest::Approx(1.92 * 2.0).epsilon(1e-12));
  CHECK(j[4] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("analytic gradients match finite differences on small nets") {
  PpoAgent tiny = make_agent(4, 1, {2}, 11);
  check_gradients(tiny, make_trajectory(tiny, 5, 21), 1e-5);

  PpoAgent wide = make_agent(6, 3, {8, 8}, 12);
  check_gradients(wide, make_trajectory(wide, 6, 22), 1e-5);
}

TEST_CASE("gradients stay correct for off-policy ratios inside the clip band") {
  PpoAgent agent = make_agent(5, 2, {8}, 13);
  // Shifting the stored behavior density moves ratios off 1 but keeps them
  // inside (1-eps, 1+eps): still the smooth branch.
  check_gradients(agent, make_trajectory(agent, 5, 23, 0.05), 1e-5);
}

TEST_CASE("clipped positive-advantage terms contribute no actor gradient") {
  PpoAgent agent = make_agent(3, 1, {2}, 14);
  // Value head pinned to zero so the advantage is the reward itself.
  agent.critic.weights.back().setZero();
  agent.critic.biases.back().setZero();

  std::vector<Transition> traj = make_trajectory(agent, 1, 24);
  traj[0].reward = 1.0;            // A = +1
  traj[0].log_prob -= 0.5;         // ratio e^0.5 ~ 1.65, far above 1+eps
  traj[0].first_in_episode = true;

  const PpoLosses losses = ppo_losses(agent, traj);
  CHECK(losses.ratios[0] == doctest::Approx(std::exp(0.5)).epsilon(1e-9));
  // min(ratio*A, clip(ratio)*A) = (1+eps)*A: a constant.
  CHECK(losses.actor_objective ==
        doctest::Approx(1.2 * 1.0).epsilon(1e-9));
  Eigen::VectorXd actor_grad, critic_grad;
  ppo_loss_gradients(agent, traj, &actor_grad, &critic_grad);
  CHECK(actor_grad.norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("terms above the clip band saturate at the clip constant") {
  // The objective is A * min(ratio, clip(ratio)): whatever the advantage's
  // sign, a ratio above 1+eps is replaced by the constant 1+eps.
  PpoAgent agent = make_agent(3, 1, {2}, 15);
  agent.critic.weights.back().setZero();
  agent.critic.biases.back().setZero();

  std::vector<Transition> traj = make_trajectory(agent, 1, 25);
  traj[0].reward = -1.0;           // A = -1
  traj[0].log_prob -= 0.5;         // ratio ~1.65 again
  traj[0].first_in_episode = true;

  const PpoLosses losses = ppo_losses(agent, traj);
  CHECK(losses.actor_objective == doctest::Approx(-1.2).epsilon(1e-9));
  Eigen::VectorXd actor_grad, critic_grad;
  ppo_loss_gradients(agent, traj, &actor_grad, &critic_grad);
  CHECK(actor_grad.norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("ratios below the clip band keep their gradient") {
  // min(ratio, clip(ratio)) = ratio when ratio < 1-eps: the term still
  // depends on the parameters and its gradient must flow.
  PpoAgent agent = make_agent(3, 1, {2}, 35);
  agent.critic.weights.back().setZero();
  agent.critic.biases.back().setZero();

  std::vector<Transition> traj = make_trajectory(agent, 1, 36);
  traj[0].reward = 1.0;            // A = +1
  traj[0].log_prob += 0.5;         // ratio e^-0.5 ~ 0.61, below 1-eps
  traj[0].first_in_episode = true;

  const PpoLosses losses = ppo_losses(agent, traj);
  CHECK(losses.actor_objective ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-9));
  Eigen::VectorXd actor_grad, critic_grad;
  ppo_loss_gradients(agent, traj, &actor_grad, &critic_grad);
  CHECK(actor_grad.norm() > 1e-6);
  check_gradients(agent, traj, 1e-5);
}

TEST_CASE("a perfect value head zeroes the critic loss and the advantages") {
  PpoAgent agent = make_agent(3, 1, {2}, 16);
  std::vector<Transition> traj = make_trajectory(agent, 1, 26);
  traj[0].reward = 1.75;
  traj[0].first_in_episode = true;
  agent.critic.weights.back().setZero();
  agent.critic.biases.back().setConstant(1.75);  // V(s) == J exactly

  const PpoLosses losses = ppo_losses(agent, traj);
  CHECK(losses.critic_loss == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(losses.advantages[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(losses.actor_objective == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("the Gaussian density matches its closed form") {
  PpoAgent agent = make_agent(4, 3, {5}, 17);
  Rng rng(31);
  const Eigen::VectorXd s = Eigen::VectorXd::NullaryExpr(
      4, [&](Eigen::Index) { return rng.uniform(-1.0, 1.0); });
  double lp = 0.0;
  const Eigen::VectorXd a = agent.policy.sample(s, rng, &lp);

  const Eigen::VectorXd mu = agent.policy.mean.forward(s);
  const Eigen::VectorXd sigma = agent.policy.log_std.array().exp();
  double expect = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double z = (a[i] - mu[i]) / sigma[i];
    expect += -0.5 * z * z - std::log(sigma[i]) -
              0.5 * std::log(2.0 * 3.14159265358979323846);
  }
  CHECK(lp == doctest::Approx(expect).epsilon(1e-12));
  CHECK(agent.policy.log_prob(s, a) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(agent.policy.mean_action(s) == mu);
}

TEST_CASE("sampling is deterministic in the generator state") {
  PpoAgent agent = make_agent(4, 2, {5}, 18);
  Rng r1(7), r2(7);
  double lp1 = 0.0, lp2 = 0.0;
  const Eigen::VectorXd s = Eigen::VectorXd::Constant(4, 0.3);
  CHECK(agent.policy.sample(s, r1, &lp1) == agent.policy.sample(s, r2, &lp2));
  CHECK(lp1 == lp2);
}

TEST_CASE("parameter flattening round-trips") {
  PpoAgent agent = make_agent(5, 2, {4, 3}, 19);
  const Eigen::VectorXd flat = agent.policy.flatten_parameters();
  // Mean-net parameters plus one log_std per action dimension.
  CHECK(flat.size() ==
        static_cast<Eigen::Index>(agent.policy.mean.parameter_count()) + 2);

  Eigen::VectorXd shifted = flat;
  shifted.array() += 0.25;
  agent.policy.unflatten_parameters(shifted);
  CHECK(agent.policy.flatten_parameters() == shifted);
  agent.policy.unflatten_parameters(flat);
  CHECK(agent.policy.flatten_parameters() == flat);
}

TEST_CASE("an optimizer update consumes the buffer and moves both networks") {
  PpoAgent agent = make_agent(4, 2, {6}, 20);
  agent.buffer = make_trajectory(agent, 6, 27);
  const Eigen::VectorXd actor_before = agent.policy.flatten_parameters();
  const Eigen::VectorXd critic_before = agent.critic.flatten_parameters();

  const PpoLosses losses = update_agent(agent);
  CHECK(agent.buffer.empty());
  CHECK(std::isfinite(losses.actor_objective));
  CHECK(std::isfinite(losses.critic_loss));
  CHECK(agent.policy.flatten_parameters() != actor_before);
  CHECK(agent.critic.flatten_parameters() != critic_before);

  // Empty buffer: a no-op.
  const Eigen::VectorXd actor_after = agent.policy.flatten_parameters();
  update_agent(agent);
  CHECK(agent.policy.flatten_parameters() == actor_after);
}

TEST_CASE("the first optimizer step moves parameters by the learning rate") {
  Adam opt(2, 0.1);
  Eigen::VectorXd params(2);
  params << 1.0, 2.0;
  Eigen::VectorXd grad(2);
  grad << 0.5, -1.0;
  opt.step(params, grad);
  // Bias correction makes the first step lr * g / (|g| + eps) ~ lr * sign(g).
  CHECK(params[0] == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(params[1] == doctest::Approx(2.1).epsilon(1e-6));
  CHECK(opt.steps == 1);
}

}  // namespace
}  // namespace fedtwin

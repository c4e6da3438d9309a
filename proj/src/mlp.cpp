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

#include "fedtwin/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace fedtwin {

void MlpGradients::set_zero() {
  for (auto& m : dw) m.setZero();
  for (auto& v : db) v.setZero();
}

Mlp::Mlp(std::vector<int> sizes, Rng& rng) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs >= 2 sizes");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    if (in <= 0 || out <= 0) throw std::invalid_argument("Mlp sizes must be positive");
    const double limit = std::sqrt(6.0 / (in + out));
    Eigen::MatrixXd w(out, in);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        w(i, j) = rng.uniform(-limit, limit);
      }
    }
    weights.push_back(std::move(w));
    biases.push_back(Eigen::VectorXd::Zero(out));
  }
}

Mlp Mlp::from_parts(std::vector<int> sizes, std::vector<Eigen::MatrixXd> weights,
                    std::vector<Eigen::VectorXd> biases) {
  Mlp m;
  m.sizes_ = std::move(sizes);
  m.weights = std::move(weights);
  m.biases = std::move(biases);
  if (m.sizes_.size() < 2 || m.weights.size() != m.sizes_.size() - 1 ||
      m.biases.size() != m.weights.size()) {
    throw std::invalid_argument("inconsistent network tensors");
  }
  for (std::size_t l = 0; l + 1 < m.sizes_.size(); ++l) {
    if (m.weights[l].rows() != m.sizes_[l + 1] ||
        m.weights[l].cols() != m.sizes_[l] ||
        m.biases[l].size() != m.sizes_[l + 1]) {
      throw std::invalid_argument("inconsistent network tensors");
    }
  }
  return m;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  Eigen::VectorXd h = x;
  for (int l = 0; l < num_layers(); ++l) {
    h = weights[l] * h + biases[l];
    if (l + 1 < num_layers()) h = h.array().tanh().matrix();
  }
  return h;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x, Tape* tape) const {
  tape->activations.clear();
  tape->activations.reserve(num_layers() + 1);
  tape->activations.push_back(x);
  Eigen::VectorXd h = x;
  for (int l = 0; l < num_layers(); ++l) {
    h = weights[l] * h + biases[l];
    if (l + 1 < num_layers()) h = h.array().tanh().matrix();
    tape->activations.push_back(h);
  }
  return h;
}

Eigen::VectorXd Mlp::backward(const Tape& tape, const Eigen::VectorXd& grad_output,
                              MlpGradients* grads) const {
  Eigen::VectorXd dy = grad_output;
  for (int l = num_layers() - 1; l >= 0; --l) {
    Eigen::VectorXd dz;
    if (l + 1 < num_layers()) {
      // tanh'(z) expressed through the stored post-activation output.
      const auto& out = tape.activations[l + 1];
      dz = (dy.array() * (1.0 - out.array().square())).matrix();
    } else {
      dz = dy;
    }
    grads->dw[l].noalias() += dz * tape.activations[l].transpose();
    grads->db[l] += dz;
    dy.noalias() = weights[l].transpose() * dz;
  }
  return dy;
}

MlpGradients Mlp::zero_gradients() const {
  MlpGradients g;
  for (int l = 0; l < num_layers(); ++l) {
    g.dw.push_back(Eigen::MatrixXd::Zero(weights[l].rows(), weights[l].cols()));
    g.db.push_back(Eigen::VectorXd::Zero(biases[l].size()));
  }
  return g;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (int l = 0; l < num_layers(); ++l) {
    n += static_cast<std::size_t>(weights[l].size()) + biases[l].size();
  }
  return n;
}

Eigen::VectorXd Mlp::flatten_parameters() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index at = 0;
  for (int l = 0; l < num_layers(); ++l) {
    flat.segment(at, weights[l].size()) =
        Eigen::Map<const Eigen::VectorXd>(weights[l].data(), weights[l].size());
    at += weights[l].size();
    flat.segment(at, biases[l].size()) = biases[l];
    at += biases[l].size();
  }
  return flat;
}

void Mlp::unflatten_parameters(const Eigen::VectorXd& flat) {
  if (flat.size() != static_cast<Eigen::Index>(parameter_count())) {
    throw std::invalid_argument("parameter vector size mismatch");
  }
  Eigen::Index at = 0;
  for (int l = 0; l < num_layers(); ++l) {
    Eigen::Map<Eigen::VectorXd>(weights[l].data(), weights[l].size()) =
        flat.segment(at, weights[l].size());
    at += weights[l].size();
    biases[l] = flat.segment(at, biases[l].size());
    at += biases[l].size();
  }
}

Eigen::VectorXd Mlp::flatten_gradients(const MlpGradients& grads) {
  Eigen::Index total = 0;
  for (std::size_t l = 0; l < grads.dw.size(); ++l) {
    total += grads.dw[l].size() + grads.db[l].size();
  }
  Eigen::VectorXd flat(total);
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < grads.dw.size(); ++l) {
    flat.segment(at, grads.dw[l].size()) =
        Eigen::Map<const Eigen::VectorXd>(grads.dw[l].data(), grads.dw[l].size());
    at += grads.dw[l].size();
    flat.segment(at, grads.db[l].size()) = grads.db[l];
    at += grads.db[l].size();
  }
  return flat;
}

Adam::Adam(Eigen::Index dim, double lr) : learning_rate(lr) {
  first_moment = Eigen::ArrayXd::Zero(dim);
  second_moment = Eigen::ArrayXd::Zero(dim);
}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (params.size() != first_moment.size() || grad.size() != first_moment.size()) {
    throw std::invalid_argument("optimizer dimension mismatch");
  }
  ++steps;
  first_moment = beta1 * first_moment + (1.0 - beta1) * grad.array();
  second_moment = beta2 * second_moment + (1.0 - beta2) * grad.array().square();
  const double c1 = 1.0 - std::pow(beta1, steps);
  const double c2 = 1.0 - std::pow(beta2, steps);
  params.array() -=
      learning_rate * (first_moment / c1) / ((second_moment / c2).sqrt() + epsilon);
}

}  // namespace fedtwin

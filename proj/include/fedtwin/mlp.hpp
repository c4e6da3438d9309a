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
// Small dense feed-forward networks with analytic backpropagation, plus an
// adaptive-moment (Adam) optimizer over flat parameter vectors. Hidden layers
// use the hyperbolic tangent; the output layer is linear.

#ifndef FEDTWIN_MLP_HPP_
#define FEDTWIN_MLP_HPP_

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "fedtwin/rng.hpp"

namespace fedtwin {

// Parameter gradients, shaped like the network they belong to.
struct MlpGradients {
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;

  void set_zero();
};

class Mlp {
 public:
  Mlp() = default;
  // sizes = {input, hidden..., output}; weights drawn Xavier-uniform.
  Mlp(std::vector<int> sizes, Rng& rng);
  // Reassembles a network from stored tensors (checkpoint loading); shapes
  // must be mutually consistent with `sizes`.
  static Mlp from_parts(std::vector<int> sizes,
                        std::vector<Eigen::MatrixXd> weights,
                        std::vector<Eigen::VectorXd> biases);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(weights.size()); }

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

  // Forward pass that keeps every layer's input/output for backprop.
  // activations[0] is the input; activations[l+1] is layer l's output.
  struct Tape {
    std::vector<Eigen::VectorXd> activations;
  };
  Eigen::VectorXd forward(const Eigen::VectorXd& x, Tape* tape) const;

  // Backpropagates dL/d(output) through the taped pass, accumulating
  // parameter gradients into *grads (which must match this net's shapes)
  // and returning dL/d(input).
  Eigen::VectorXd backward(const Tape& tape, const Eigen::VectorXd& grad_output,
                           MlpGradients* grads) const;

  MlpGradients zero_gradients() const;
  std::size_t parameter_count() const;

  // Flat parameter vector: layer 0 weights (column-major), layer 0 biases,
  // layer 1 weights, ... Used by the optimizer and by gradient checks.
  Eigen::VectorXd flatten_parameters() const;
  void unflatten_parameters(const Eigen::VectorXd& flat);
  static Eigen::VectorXd flatten_gradients(const MlpGradients& grads);

  std::vector<Eigen::MatrixXd> weights;  // per layer, output x input
  std::vector<Eigen::VectorXd> biases;   // per layer

 private:
  std::vector<int> sizes_;
};

// Adaptive-moment estimation over a flat parameter vector. step() descends:
// params -= lr * m_hat / (sqrt(v_hat) + eps). Callers maximizing an
// objective pass the negated gradient.
class Adam {
 public:
  Adam() = default;
  Adam(Eigen::Index dim, double learning_rate);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

  // All state is serialized alongside checkpoints so training resumes exactly.
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long steps = 0;
  Eigen::ArrayXd first_moment;
  Eigen::ArrayXd second_moment;
};

}  // namespace fedtwin

#endif  // FEDTWIN_MLP_HPP_

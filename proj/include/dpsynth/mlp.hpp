//
// Copyright 2026 The dpsynth Authors
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

#ifndef DPSYNTH_MLP_HPP_
#define DPSYNTH_MLP_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dpsynth/rng.hpp"

// Small fully connected networks with hand-written forward and backward
// passes: a conditional generator and the teacher discriminators. When a
// network is conditional (label_dim > 0), the one-hot class label is
// concatenated to the input of every layer.
//
// Probabilities are clamped to [1e-7, 1 - 1e-7] before any log; the analytic
// gradient is zero where the clamp is active, so backpropagation matches
// finite differences of the clamped loss.

namespace dpsynth {

enum class Activation { kIdentity, kLeakyRelu, kSigmoid, kTanh };

constexpr double kLeakyReluSlope = 0.2;
constexpr double kProbClamp = 1e-7;

std::string_view ToString(Activation activation);
Activation ActivationFromString(std::string_view name);

double ApplyActivation(Activation activation, double x);
// Derivative expressed through the activation output y = f(x).
double ActivationDerivative(Activation activation, double y);

struct Mlp {
  int input_dim = 0;
  int label_dim = 0;  // 0 means unconditional
  std::vector<int> layer_sizes;           // output units per layer
  std::vector<Activation> activations;    // one per layer
  // weights[l] is layer_sizes[l] x (fan_in + label_dim), row-major, where
  // fan_in is input_dim for l == 0 and layer_sizes[l-1] otherwise.
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  int OutputDim() const { return layer_sizes.back(); }
  int FanIn(int layer) const {
    return layer == 0 ? input_dim : layer_sizes[layer - 1];
  }
};

// Fan-in scaled uniform init: W ~ U(-s, s) with s = 1/sqrt(fan_in +
// label_dim), biases zero.
Mlp MakeMlp(int input_dim, int label_dim, const std::vector<int>& layer_sizes,
            const std::vector<Activation>& activations, RngStream& rng);

// Generator: leaky-ReLU hidden layers, tanh output of size data_dim.
Mlp MakeGenerator(int noise_dim, int label_dim, const std::vector<int>& hidden,
                  int data_dim, RngStream& rng);

// Discriminator: leaky-ReLU hidden layers, single sigmoid output.
Mlp MakeDiscriminator(int data_dim, int label_dim,
                      const std::vector<int>& hidden, RngStream& rng);

// Plain forward pass. label must have length label_dim (empty when
// unconditional).
std::vector<double> Forward(const Mlp& net, std::span<const double> input,
                            std::span<const double> label);

// Per-layer gradients plus the gradient with respect to the input record
// (label components excluded).
struct MlpGradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  std::vector<double> input;

  void Accumulate(const MlpGradients& other);
  void Scale(double factor);
};

MlpGradients ZeroGradients(const Mlp& net);

// Backpropagates d(loss)/d(output) through the network for one sample.
MlpGradients Backward(const Mlp& net, std::span<const double> input,
                      std::span<const double> label,
                      std::span<const double> output_gradient);

// Binary cross-entropy of the discriminator on one record: -log D(x) for
// real records, -log(1 - D(x)) for fakes. Throws on non-finite activations.
double DiscLoss(const Mlp& discriminator, std::span<const double> x,
                std::span<const double> label, bool is_real);

// Generator-facing loss -log D(x): low when the discriminator takes the
// record for real.
double GeneratorFacingLoss(const Mlp& discriminator, std::span<const double> x,
                           std::span<const double> label);

// Direction that makes x more convincing to the discriminator: the descent
// direction of the generator-facing loss, i.e. the input gradient of
// log D(x), with every component clamped to [-clip, clip] on the way out.
std::vector<double> AdversarialPerturbation(const Mlp& discriminator,
                                            std::span<const double> x,
                                            std::span<const double> label,
                                            double clip);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int64_t step = 0;
  std::vector<std::vector<double>> m_weights, v_weights;
  std::vector<std::vector<double>> m_biases, v_biases;
};

AdamState MakeAdamState(const Mlp& net);

// One Adam update of `net` along `gradients` with the given learning rate.
void AdamUpdate(Mlp& net, AdamState& state, const MlpGradients& gradients,
                double learning_rate);

// One Adam step of the discriminator on BCE over the concatenated
// real-plus-fake batch. Returns the mean loss before the step.
double TeacherStep(Mlp& discriminator, AdamState& state,
                   const std::vector<std::vector<double>>& real_batch,
                   const std::vector<std::vector<double>>& real_labels,
                   const std::vector<std::vector<double>>& fake_batch,
                   const std::vector<std::vector<double>>& fake_labels,
                   double learning_rate);

// One Adam step of the generator on the mean squared error between G(z) and
// the perturbed targets x_hat (mean over components and over the batch).
// Returns the loss before the step.
double GeneratorStep(Mlp& generator, AdamState& state,
                     const std::vector<std::vector<double>>& z_batch,
                     const std::vector<std::vector<double>>& labels,
                     const std::vector<std::vector<double>>& x_hat,
                     double learning_rate);

// Versioned JSON checkpoint of layer sizes, activations and parameters.
void SaveMlp(const Mlp& net, const std::filesystem::path& path);
Mlp LoadMlp(const std::filesystem::path& path);

}  // namespace dpsynth

#endif  // DPSYNTH_MLP_HPP_

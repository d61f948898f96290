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

#include "dpsynth/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace dpsynth {

namespace {

void CheckShapes(const Mlp& net, std::span<const double> input,
                 std::span<const double> label) {
  if (static_cast<int>(input.size()) != net.input_dim) {
    throw std::invalid_argument("input length does not match network");
  }
  if (static_cast<int>(label.size()) != net.label_dim) {
    throw std::invalid_argument("label length does not match network");
  }
}

// Activations and layer inputs (with the label appended) for one sample.
struct ForwardCache {
  // inputs[l] has length FanIn(l) + label_dim; outputs[l] has length
  // layer_sizes[l].
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> outputs;
};

ForwardCache RunForward(const Mlp& net, std::span<const double> input,
                        std::span<const double> label) {
  CheckShapes(net, input, label);
  ForwardCache cache;
  const std::size_t layers = net.layer_sizes.size();
  cache.inputs.resize(layers);
  cache.outputs.resize(layers);
  std::vector<double> current(input.begin(), input.end());
  for (std::size_t l = 0; l < layers; ++l) {
    std::vector<double>& u = cache.inputs[l];
    u = current;
    u.insert(u.end(), label.begin(), label.end());
    const int out_dim = net.layer_sizes[l];
    const std::size_t in_dim = u.size();
    std::vector<double> out(out_dim);
    const std::vector<double>& w = net.weights[l];
    for (int i = 0; i < out_dim; ++i) {
      double z = net.biases[l][i];
      const double* row = &w[static_cast<std::size_t>(i) * in_dim];
      for (std::size_t j = 0; j < in_dim; ++j) z += row[j] * u[j];
      out[i] = ApplyActivation(net.activations[l], z);
    }
    cache.outputs[l] = out;
    current = std::move(out);
  }
  return cache;
}

double ClampProb(double p) {
  return std::clamp(p, kProbClamp, 1.0 - kProbClamp);
}

double DiscProbability(const Mlp& discriminator, std::span<const double> x,
                       std::span<const double> label) {
  const std::vector<double> out = Forward(discriminator, x, label);
  if (out.size() != 1) {
    throw std::invalid_argument("discriminator must have a single output");
  }
  if (!std::isfinite(out[0])) {
    std::ostringstream msg;
    msg << "non-finite discriminator output: " << out[0];
    throw std::runtime_error(msg.str());
  }
  return out[0];
}

void AdamUpdateTensor(std::vector<double>& params, std::vector<double>& m,
                      std::vector<double>& v, const std::vector<double>& grad,
                      const AdamState& state, double learning_rate) {
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * grad[i];
    v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

}  // namespace

std::string_view ToString(Activation activation) {
  switch (activation) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kLeakyRelu:
      return "leaky-relu";
    case Activation::kSigmoid:
      return "sigmoid";
    case Activation::kTanh:
      return "tanh";
  }
  return "unknown";
}

Activation ActivationFromString(std::string_view name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "leaky-relu") return Activation::kLeakyRelu;
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "tanh") return Activation::kTanh;
  throw std::invalid_argument("unknown activation: " + std::string(name));
}

double ApplyActivation(Activation activation, double x) {
  switch (activation) {
    case Activation::kIdentity:
      return x;
    case Activation::kLeakyRelu:
      return x > 0.0 ? x : kLeakyReluSlope * x;
    case Activation::kSigmoid:
      return 1.0 / (1.0 + std::exp(-x));
    case Activation::kTanh:
      return std::tanh(x);
  }
  return x;
}

double ActivationDerivative(Activation activation, double y) {
  switch (activation) {
    case Activation::kIdentity:
      return 1.0;
    case Activation::kLeakyRelu:
      return y > 0.0 ? 1.0 : kLeakyReluSlope;
    case Activation::kSigmoid:
      return y * (1.0 - y);
    case Activation::kTanh:
      return 1.0 - y * y;
  }
  return 1.0;
}

Mlp MakeMlp(int input_dim, int label_dim, const std::vector<int>& layer_sizes,
            const std::vector<Activation>& activations, RngStream& rng) {
  if (input_dim < 1 || label_dim < 0) {
    throw std::invalid_argument("bad network dimensions");
  }
  if (layer_sizes.empty() || layer_sizes.size() != activations.size()) {
    throw std::invalid_argument("layer sizes and activations must align");
  }
  for (int size : layer_sizes) {
    if (size < 1) throw std::invalid_argument("layer sizes must be positive");
  }
  Mlp net;
  net.input_dim = input_dim;
  net.label_dim = label_dim;
  net.layer_sizes = layer_sizes;
  net.activations = activations;
  net.weights.resize(layer_sizes.size());
  net.biases.resize(layer_sizes.size());
  for (std::size_t l = 0; l < layer_sizes.size(); ++l) {
    const int fan_in = net.FanIn(static_cast<int>(l)) + label_dim;
    const int fan_out = layer_sizes[l];
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    net.weights[l].resize(static_cast<std::size_t>(fan_out) * fan_in);
    for (double& w : net.weights[l]) {
      w = (2.0 * rng.Uniform01() - 1.0) * scale;
    }
    net.biases[l].assign(fan_out, 0.0);
  }
  return net;
}

Mlp MakeGenerator(int noise_dim, int label_dim, const std::vector<int>& hidden,
                  int data_dim, RngStream& rng) {
  std::vector<int> sizes = hidden;
  sizes.push_back(data_dim);
  std::vector<Activation> acts(hidden.size(), Activation::kLeakyRelu);
  acts.push_back(Activation::kTanh);
  return MakeMlp(noise_dim, label_dim, sizes, acts, rng);
}

Mlp MakeDiscriminator(int data_dim, int label_dim,
                      const std::vector<int>& hidden, RngStream& rng) {
  std::vector<int> sizes = hidden;
  sizes.push_back(1);
  std::vector<Activation> acts(hidden.size(), Activation::kLeakyRelu);
  acts.push_back(Activation::kSigmoid);
  return MakeMlp(data_dim, label_dim, sizes, acts, rng);
}

std::vector<double> Forward(const Mlp& net, std::span<const double> input,
                            std::span<const double> label) {
  return RunForward(net, input, label).outputs.back();
}

void MlpGradients::Accumulate(const MlpGradients& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (std::size_t i = 0; i < weights[l].size(); ++i) {
      weights[l][i] += other.weights[l][i];
    }
    for (std::size_t i = 0; i < biases[l].size(); ++i) {
      biases[l][i] += other.biases[l][i];
    }
  }
  for (std::size_t i = 0; i < input.size(); ++i) input[i] += other.input[i];
}

void MlpGradients::Scale(double factor) {
  for (auto& layer : weights) {
    for (double& g : layer) g *= factor;
  }
  for (auto& layer : biases) {
    for (double& g : layer) g *= factor;
  }
  for (double& g : input) g *= factor;
}

MlpGradients ZeroGradients(const Mlp& net) {
  MlpGradients grads;
  grads.weights.resize(net.weights.size());
  grads.biases.resize(net.biases.size());
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    grads.weights[l].assign(net.weights[l].size(), 0.0);
    grads.biases[l].assign(net.biases[l].size(), 0.0);
  }
  grads.input.assign(net.input_dim, 0.0);
  return grads;
}

MlpGradients Backward(const Mlp& net, std::span<const double> input,
                      std::span<const double> label,
                      std::span<const double> output_gradient) {
  if (static_cast<int>(output_gradient.size()) != net.OutputDim()) {
    throw std::invalid_argument("output gradient length does not match");
  }
  const ForwardCache cache = RunForward(net, input, label);
  MlpGradients grads = ZeroGradients(net);
  std::vector<double> delta(output_gradient.begin(), output_gradient.end());
  for (int l = static_cast<int>(net.layer_sizes.size()) - 1; l >= 0; --l) {
    const std::vector<double>& u = cache.inputs[l];
    const std::vector<double>& out = cache.outputs[l];
    const std::size_t in_dim = u.size();
    const int out_dim = net.layer_sizes[l];
    const int fan_in = net.FanIn(l);
    std::vector<double> next_delta(fan_in, 0.0);
    for (int i = 0; i < out_dim; ++i) {
      const double dz = delta[i] * ActivationDerivative(net.activations[l], out[i]);
      if (dz == 0.0) continue;
      double* w_grad = &grads.weights[l][static_cast<std::size_t>(i) * in_dim];
      const double* w = &net.weights[l][static_cast<std::size_t>(i) * in_dim];
      for (std::size_t j = 0; j < in_dim; ++j) w_grad[j] += dz * u[j];
      grads.biases[l][i] += dz;
      // Only the non-label slice of the input feeds the previous layer.
      for (int j = 0; j < fan_in; ++j) next_delta[j] += dz * w[j];
    }
    delta = std::move(next_delta);
  }
  grads.input = delta;
  return grads;
}

double DiscLoss(const Mlp& discriminator, std::span<const double> x,
                std::span<const double> label, bool is_real) {
  const double p = ClampProb(DiscProbability(discriminator, x, label));
  return is_real ? -std::log(p) : -std::log(1.0 - p);
}

double GeneratorFacingLoss(const Mlp& discriminator, std::span<const double> x,
                           std::span<const double> label) {
  return -std::log(ClampProb(DiscProbability(discriminator, x, label)));
}

std::vector<double> AdversarialPerturbation(const Mlp& discriminator,
                                            std::span<const double> x,
                                            std::span<const double> label,
                                            double clip) {
  if (!(clip > 0.0)) {
    throw std::invalid_argument("clip bound must be positive");
  }
  const double p = DiscProbability(discriminator, x, label);
  // d(log D)/dp = 1/p on the clamp interior, 0 where the clamp is active.
  double dp = 0.0;
  if (p > kProbClamp && p < 1.0 - kProbClamp) dp = 1.0 / p;
  const std::vector<double> out_grad = {dp};
  MlpGradients grads = Backward(discriminator, x, label, out_grad);
  std::vector<double> perturbation = std::move(grads.input);
  for (double& value : perturbation) {
    if (!std::isfinite(value)) {
      throw std::runtime_error("non-finite adversarial perturbation");
    }
    value = std::clamp(value, -clip, clip);
  }
  return perturbation;
}

AdamState MakeAdamState(const Mlp& net) {
  AdamState state;
  state.m_weights.resize(net.weights.size());
  state.v_weights.resize(net.weights.size());
  state.m_biases.resize(net.biases.size());
  state.v_biases.resize(net.biases.size());
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    state.m_weights[l].assign(net.weights[l].size(), 0.0);
    state.v_weights[l].assign(net.weights[l].size(), 0.0);
    state.m_biases[l].assign(net.biases[l].size(), 0.0);
    state.v_biases[l].assign(net.biases[l].size(), 0.0);
  }
  return state;
}

void AdamUpdate(Mlp& net, AdamState& state, const MlpGradients& gradients,
                double learning_rate) {
  ++state.step;
  for (std::size_t l = 0; l < net.weights.size(); ++l) {
    AdamUpdateTensor(net.weights[l], state.m_weights[l], state.v_weights[l],
                     gradients.weights[l], state, learning_rate);
    AdamUpdateTensor(net.biases[l], state.m_biases[l], state.v_biases[l],
                     gradients.biases[l], state, learning_rate);
  }
}

double TeacherStep(Mlp& discriminator, AdamState& state,
                   const std::vector<std::vector<double>>& real_batch,
                   const std::vector<std::vector<double>>& real_labels,
                   const std::vector<std::vector<double>>& fake_batch,
                   const std::vector<std::vector<double>>& fake_labels,
                   double learning_rate) {
  if (real_batch.empty() || fake_batch.empty()) {
    throw std::invalid_argument("teacher step needs nonempty batches");
  }
  const std::size_t total = real_batch.size() + fake_batch.size();
  MlpGradients grads = ZeroGradients(discriminator);
  double loss = 0.0;
  const auto accumulate = [&](const std::vector<double>& x,
                              const std::vector<double>& label, bool is_real) {
    const double p_raw = DiscProbability(discriminator, x, label);
    const double p = ClampProb(p_raw);
    loss += is_real ? -std::log(p) : -std::log(1.0 - p);
    double dp = 0.0;
    if (p_raw > kProbClamp && p_raw < 1.0 - kProbClamp) {
      dp = is_real ? -1.0 / p : 1.0 / (1.0 - p);
    }
    const std::vector<double> out_grad = {dp};
    grads.Accumulate(Backward(discriminator, x, label, out_grad));
  };
  for (std::size_t i = 0; i < real_batch.size(); ++i) {
    accumulate(real_batch[i], real_labels.empty() ? std::vector<double>{}
                                                  : real_labels[i],
               true);
  }
  for (std::size_t i = 0; i < fake_batch.size(); ++i) {
    accumulate(fake_batch[i], fake_labels.empty() ? std::vector<double>{}
                                                  : fake_labels[i],
               false);
  }
  grads.Scale(1.0 / static_cast<double>(total));
  loss /= static_cast<double>(total);
  AdamUpdate(discriminator, state, grads, learning_rate);
  return loss;
}

double GeneratorStep(Mlp& generator, AdamState& state,
                     const std::vector<std::vector<double>>& z_batch,
                     const std::vector<std::vector<double>>& labels,
                     const std::vector<std::vector<double>>& x_hat,
                     double learning_rate) {
  if (z_batch.empty() || z_batch.size() != x_hat.size()) {
    throw std::invalid_argument("z batch and targets must align");
  }
  if (!labels.empty() && labels.size() != z_batch.size()) {
    throw std::invalid_argument("labels must align with the z batch");
  }
  const int dim = generator.OutputDim();
  const double batch = static_cast<double>(z_batch.size());
  MlpGradients grads = ZeroGradients(generator);
  double loss = 0.0;
  for (std::size_t r = 0; r < z_batch.size(); ++r) {
    const std::vector<double>& label =
        labels.empty() ? std::vector<double>{} : labels[r];
    const std::vector<double> out = Forward(generator, z_batch[r], label);
    if (static_cast<int>(x_hat[r].size()) != dim) {
      throw std::invalid_argument("target length does not match generator");
    }
    std::vector<double> out_grad(dim);
    double record_loss = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double diff = out[i] - x_hat[r][i];
      record_loss += diff * diff;
      out_grad[i] = 2.0 * diff / (dim * batch);
    }
    loss += record_loss / dim;
    grads.Accumulate(Backward(generator, z_batch[r], label, out_grad));
  }
  loss /= batch;
  AdamUpdate(generator, state, grads, learning_rate);
  return loss;
}

void SaveMlp(const Mlp& net, const std::filesystem::path& path) {
  nlohmann::ordered_json doc;
  doc["format_version"] = 1;
  doc["input_dim"] = net.input_dim;
  doc["label_dim"] = net.label_dim;
  doc["layer_sizes"] = net.layer_sizes;
  std::vector<std::string> acts;
  acts.reserve(net.activations.size());
  for (Activation a : net.activations) acts.emplace_back(ToString(a));
  doc["activations"] = acts;
  doc["weights"] = net.weights;
  doc["biases"] = net.biases;
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open checkpoint file: " + path.string());
  }
  out << doc.dump() << '\n';
}

Mlp LoadMlp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read checkpoint file: " + path.string());
  }
  nlohmann::json doc;
  in >> doc;
  if (doc.value("format_version", 0) != 1) {
    throw std::runtime_error("unsupported checkpoint version in " +
                             path.string());
  }
  Mlp net;
  net.input_dim = doc.at("input_dim").get<int>();
  net.label_dim = doc.at("label_dim").get<int>();
  net.layer_sizes = doc.at("layer_sizes").get<std::vector<int>>();
  for (const auto& name : doc.at("activations")) {
    net.activations.push_back(ActivationFromString(name.get<std::string>()));
  }
  net.weights = doc.at("weights").get<std::vector<std::vector<double>>>();
  net.biases = doc.at("biases").get<std::vector<std::vector<double>>>();
  if (net.weights.size() != net.layer_sizes.size() ||
      net.biases.size() != net.layer_sizes.size() ||
      net.activations.size() != net.layer_sizes.size()) {
    throw std::runtime_error("inconsistent checkpoint in " + path.string());
  }
  return net;
}

}  // namespace dpsynth

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

#ifndef DPSYNTH_TRAINING_HPP_
#define DPSYNTH_TRAINING_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "dpsynth/accountant.hpp"
#include "dpsynth/aggregator.hpp"
#include "dpsynth/dataset.hpp"
#include "dpsynth/mlp.hpp"
#include "dpsynth/projection.hpp"

// Training orchestration. Each iteration: the generator produces a fake
// batch, every teacher takes a discriminator step on (own shard batch,
// fakes) and emits a clipped adversarial perturbation per fake record, the
// perturbations are privately aggregated per record, and the generator takes
// one MSE step toward the perturbed targets. Training stops when the next
// iteration would overshoot the privacy budget, or at the iteration cap.

namespace dpsynth {

// Raised when the budget is already spent before the first iteration.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  int num_teachers = 10;
  int batch_size = 16;
  int num_bins = 10;
  double clip = 1e-4;
  double sigma1 = 8.0;
  double sigma2 = 4.0;
  double threshold = 0.5;  // fraction of the teacher count
  int proj_dims = 4;
  double learning_rate = 1e-3;
  int max_iterations = 1000;
  double epsilon_target = 0.0;  // <= 0 disables the budget stop
  double delta = 1e-5;
  uint64_t seed = 1;
  bool conditional = true;
  std::vector<int> hidden_units = {64, 64};
  int noise_dim = 8;
  int teacher_steps = 1;       // discriminator steps per iteration
  int checkpoint_every = 0;    // 0 disables checkpoints
  double ratio_epsilon = 0.01; // Laplace budget for the class-ratio query
  BackProjection back_projection = BackProjection::kTranspose;
  int dump_tally_every = 0;    // 0 disables tally dumps

  void Validate() const;
};

// Named presets: "toy" (desk-scale defaults), "credit", "mnist-eps1",
// "mnist-eps10".
TrainConfig PresetConfig(const std::string& name);

// Flat key = value text, '#' comments. Unknown keys are rejected. Values in
// `base` are used for keys the file does not set.
TrainConfig ParseConfigFile(const std::filesystem::path& path,
                            const TrainConfig& base = {});
TrainConfig ParseConfigText(const std::string& text,
                            const TrainConfig& base = {});
std::string ConfigToString(const TrainConfig& config);

// Deterministic disjoint shards covering 0..count-1, sizes differing by at
// most one. With labels, assignment is stratified so every shard sees every
// class where counts permit. Requires 1 <= num_shards <= count.
std::vector<std::vector<std::size_t>> Partition(std::size_t count,
                                                const std::vector<int>& labels,
                                                int num_shards, uint64_t seed);

// Per-class probabilities from Laplace-noised counts (scale 1/epsilon,
// sensitivity 1), clamped at zero and renormalized. Falls back to uniform
// with a warning when every noisy count is zero. Charges `epsilon` to the
// ledger when one is given.
std::vector<double> NoisyClassRatio(const std::vector<int>& labels,
                                    int num_classes, double epsilon,
                                    RngStream& rng, PrivacyLedger* ledger);

struct IterationMetrics {
  int iteration = 0;
  double gen_loss = 0.0;
  double pass_rate = 0.0;
  double mean_vote_gap = 0.0;
  double epsilon = 0.0;
};

// Fixed run-log line; byte-stable for a given metrics struct.
std::string RunLogLine(const IterationMetrics& metrics);

struct RunState {
  int iterations = 0;
  PrivacyLedger ledger;
  DpGuarantee guarantee;
  std::vector<IterationMetrics> metrics;
  std::vector<double> class_ratios;  // empty for unconditional runs
  bool stopped_on_budget = false;
};

struct TrainCallbacks {
  std::function<void(int iteration, const Mlp& generator)> on_checkpoint;
  std::function<void(const IterationMetrics&)> on_iteration;
  std::function<void(int iteration, const VoteTally&)> on_tally;
};

struct TrainResult {
  Mlp generator;
  RunState state;
};

TrainResult Train(const TrainConfig& config, const TabularDataset& dataset,
                  const TrainCallbacks& callbacks = {});

// Generator outputs with their conditioning labels. x_hat carries the
// perturbed targets during training; batches returned by Generate leave it
// empty.
struct SyntheticBatch {
  std::vector<std::vector<double>> records;  // scaled space
  std::vector<int> labels;                   // empty when unconditional
  std::vector<std::vector<double>> x_hat;
};

// Samples `count` records: labels from `class_ratios` (pass empty for
// unconditional generators), fresh noise per record. Deterministic in seed;
// touches no privacy state.
SyntheticBatch Generate(const Mlp& generator, std::size_t count,
                        const std::vector<double>& class_ratios,
                        uint64_t seed);

}  // namespace dpsynth

#endif  // DPSYNTH_TRAINING_HPP_

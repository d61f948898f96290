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

#include "dpsynth/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace dpsynth {

namespace {

std::vector<double> OneHot(int label, int num_classes) {
  std::vector<double> encoded(num_classes, 0.0);
  encoded[label] = 1.0;
  return encoded;
}

void FisherYates(std::vector<std::size_t>& values, RngStream& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = rng.UniformBelow(i);
    std::swap(values[i - 1], values[j]);
  }
}

// Every teacher's private view: shard indices only. A teacher cannot address
// records outside its shard through this view.
class ShardView {
 public:
  ShardView(const TabularDataset& dataset, std::vector<std::size_t> indices)
      : dataset_(dataset), indices_(std::move(indices)) {}

  std::size_t Size() const { return indices_.size(); }

  const std::vector<double>& Features(std::size_t i) const {
    return dataset_.features[indices_.at(i)];
  }
  int Label(std::size_t i) const { return dataset_.labels[indices_.at(i)]; }

 private:
  const TabularDataset& dataset_;
  std::vector<std::size_t> indices_;
};

struct Teacher {
  Mlp discriminator;
  AdamState optimizer;
  ShardView shard;
  RngStream data_stream;
};

// Runs fn(t) for every teacher index. Teachers own disjoint parameters,
// shards and random streams, so the work is safe to spread over threads and
// the results do not depend on scheduling.
void ForEachTeacher(int count, const std::function<void(int)>& fn) {
  const unsigned hardware = std::thread::hardware_concurrency();
  const int workers =
      std::max(1, std::min(count, static_cast<int>(hardware ? hardware : 1)));
  if (workers == 1) {
    for (int t = 0; t < count; ++t) fn(t);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      int t;
      while ((t = next.fetch_add(1)) < count) {
        try {
          fn(t);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& thread : threads) thread.join();
  if (error) std::rethrow_exception(error);
}

// Worst-case RDP cost of one training iteration on the current order grid:
// batch_size aggregation queries, each with proj_dims threshold checks and
// proj_dims data-independent argmax releases.
RdpCurve IterationWorstCase(const TrainConfig& config,
                            const std::vector<double>& orders) {
  RdpCurve curve;
  curve.orders = orders;
  curve.epsilons.reserve(orders.size());
  const double queries = static_cast<double>(config.batch_size);
  const double dims = static_cast<double>(config.proj_dims);
  for (double order : orders) {
    const double threshold_cost =
        dims * order / (2.0 * config.sigma1 * config.sigma1);
    const double argmax_cost = dims * order / (config.sigma2 * config.sigma2);
    curve.epsilons.push_back(queries * (threshold_cost + argmax_cost));
  }
  return curve;
}

std::string FormatKeyValue(const std::string& key, const std::string& value) {
  return key + " = " + value + "\n";
}

std::string DoubleValue(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

}  // namespace

void TrainConfig::Validate() const {
  if (num_teachers < 2) {
    throw std::invalid_argument("need at least 2 teachers");
  }
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (num_bins < 2) throw std::invalid_argument("num_bins must be >= 2");
  if (!(clip > 0.0)) throw std::invalid_argument("clip must be positive");
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) {
    throw std::invalid_argument("sigma1 and sigma2 must be positive");
  }
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("threshold must be in (0, 1]");
  }
  if (proj_dims < 1) throw std::invalid_argument("proj_dims must be >= 1");
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("learning_rate must be positive");
  }
  if (max_iterations < 0) {
    throw std::invalid_argument("max_iterations must be >= 0");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must be in (0, 1)");
  }
  if (hidden_units.empty()) {
    throw std::invalid_argument("need at least one hidden layer");
  }
  for (int units : hidden_units) {
    if (units < 1) throw std::invalid_argument("hidden_units must be positive");
  }
  if (noise_dim < 1) throw std::invalid_argument("noise_dim must be >= 1");
  if (teacher_steps < 1) {
    throw std::invalid_argument("teacher_steps must be >= 1");
  }
  if (checkpoint_every < 0 || dump_tally_every < 0) {
    throw std::invalid_argument("periods must be nonnegative");
  }
  if (conditional && !(ratio_epsilon > 0.0)) {
    throw std::invalid_argument("ratio_epsilon must be positive");
  }
}

TrainConfig PresetConfig(const std::string& name) {
  TrainConfig config;  // defaults are the desk-scale toy settings
  if (name == "toy") {
    return config;
  }
  if (name == "credit") {
    config.num_teachers = 2100;
    config.batch_size = 32;
    config.sigma1 = 1500.0;
    config.sigma2 = 600.0;
    config.proj_dims = 5;
    config.epsilon_target = 0.99;
    config.max_iterations = 100000;
    return config;
  }
  if (name == "mnist-eps10") {
    config.num_teachers = 2000;
    config.batch_size = 30;
    config.sigma1 = 600.0;
    config.sigma2 = 100.0;
    config.proj_dims = 10;
    config.epsilon_target = 10.0;
    config.max_iterations = 100000;
    return config;
  }
  if (name == "mnist-eps1") {
    config.num_teachers = 4000;
    config.batch_size = 15;
    config.sigma1 = 3000.0;
    config.sigma2 = 1000.0;
    config.proj_dims = 10;
    config.epsilon_target = 1.0;
    config.max_iterations = 100000;
    return config;
  }
  throw std::invalid_argument("unknown preset: " + name);
}

TrainConfig ParseConfigText(const std::string& text, const TrainConfig& base) {
  TrainConfig config = base;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    const auto trim = [](std::string s) {
      const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
      s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), is_space));
      s.erase(std::find_if_not(s.rbegin(), s.rend(), is_space).base(), s.end());
      return s;
    };
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    try {
      if (key == "num_teachers") {
        config.num_teachers = std::stoi(value);
      } else if (key == "batch_size") {
        config.batch_size = std::stoi(value);
      } else if (key == "num_bins") {
        config.num_bins = std::stoi(value);
      } else if (key == "clip") {
        config.clip = std::stod(value);
      } else if (key == "sigma1") {
        config.sigma1 = std::stod(value);
      } else if (key == "sigma2") {
        config.sigma2 = std::stod(value);
      } else if (key == "threshold") {
        config.threshold = std::stod(value);
      } else if (key == "proj_dims") {
        config.proj_dims = std::stoi(value);
      } else if (key == "learning_rate") {
        config.learning_rate = std::stod(value);
      } else if (key == "max_iterations") {
        config.max_iterations = std::stoi(value);
      } else if (key == "epsilon_target") {
        config.epsilon_target = std::stod(value);
      } else if (key == "delta") {
        config.delta = std::stod(value);
      } else if (key == "seed") {
        config.seed = std::stoull(value);
      } else if (key == "conditional") {
        if (value == "true" || value == "1") {
          config.conditional = true;
        } else if (value == "false" || value == "0") {
          config.conditional = false;
        } else {
          throw std::invalid_argument("expected true/false");
        }
      } else if (key == "hidden_units") {
        config.hidden_units.clear();
        std::istringstream units(value);
        std::string token;
        while (std::getline(units, token, ',')) {
          config.hidden_units.push_back(std::stoi(trim(token)));
        }
      } else if (key == "noise_dim") {
        config.noise_dim = std::stoi(value);
      } else if (key == "teacher_steps") {
        config.teacher_steps = std::stoi(value);
      } else if (key == "checkpoint_every") {
        config.checkpoint_every = std::stoi(value);
      } else if (key == "ratio_epsilon") {
        config.ratio_epsilon = std::stod(value);
      } else if (key == "back_projection") {
        if (value == "transpose") {
          config.back_projection = BackProjection::kTranspose;
        } else if (value == "pseudo-inverse") {
          config.back_projection = BackProjection::kPseudoInverse;
        } else {
          throw std::invalid_argument("expected transpose or pseudo-inverse");
        }
      } else if (key == "dump_tally_every") {
        config.dump_tally_every = std::stoi(value);
      } else {
        throw std::invalid_argument("unknown key");
      }
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  " (" + key + "): " + e.what());
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  " (" + key + "): value out of range");
    }
  }
  return config;
}

TrainConfig ParseConfigFile(const std::filesystem::path& path,
                            const TrainConfig& base) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open config file: " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseConfigText(buffer.str(), base);
}

std::string ConfigToString(const TrainConfig& config) {
  std::string out;
  out += FormatKeyValue("num_teachers", std::to_string(config.num_teachers));
  out += FormatKeyValue("batch_size", std::to_string(config.batch_size));
  out += FormatKeyValue("num_bins", std::to_string(config.num_bins));
  out += FormatKeyValue("clip", DoubleValue(config.clip));
  out += FormatKeyValue("sigma1", DoubleValue(config.sigma1));
  out += FormatKeyValue("sigma2", DoubleValue(config.sigma2));
  out += FormatKeyValue("threshold", DoubleValue(config.threshold));
  out += FormatKeyValue("proj_dims", std::to_string(config.proj_dims));
  out += FormatKeyValue("learning_rate", DoubleValue(config.learning_rate));
  out += FormatKeyValue("max_iterations",
                        std::to_string(config.max_iterations));
  out += FormatKeyValue("epsilon_target", DoubleValue(config.epsilon_target));
  out += FormatKeyValue("delta", DoubleValue(config.delta));
  out += FormatKeyValue("seed", std::to_string(config.seed));
  out += FormatKeyValue("conditional", config.conditional ? "true" : "false");
  std::string units;
  for (std::size_t i = 0; i < config.hidden_units.size(); ++i) {
    units += (i == 0 ? "" : ",") + std::to_string(config.hidden_units[i]);
  }
  out += FormatKeyValue("hidden_units", units);
  out += FormatKeyValue("noise_dim", std::to_string(config.noise_dim));
  out += FormatKeyValue("teacher_steps", std::to_string(config.teacher_steps));
  out += FormatKeyValue("checkpoint_every",
                        std::to_string(config.checkpoint_every));
  out += FormatKeyValue("ratio_epsilon", DoubleValue(config.ratio_epsilon));
  out += FormatKeyValue("back_projection",
                        config.back_projection == BackProjection::kTranspose
                            ? "transpose"
                            : "pseudo-inverse");
  out += FormatKeyValue("dump_tally_every",
                        std::to_string(config.dump_tally_every));
  return out;
}

std::vector<std::vector<std::size_t>> Partition(std::size_t count,
                                                const std::vector<int>& labels,
                                                int num_shards, uint64_t seed) {
  if (num_shards < 1) {
    throw std::invalid_argument("need at least one shard");
  }
  if (static_cast<std::size_t>(num_shards) > count) {
    throw std::invalid_argument("more shards than records");
  }
  if (!labels.empty() && labels.size() != count) {
    throw std::invalid_argument("labels must align with records");
  }
  RngStream rng(DeriveSeed(seed, SeedDomain::kPartition, 0));
  std::vector<std::vector<std::size_t>> shards(num_shards);
  std::size_t cursor = 0;
  if (labels.empty()) {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    FisherYates(order, rng);
    for (std::size_t index : order) {
      shards[cursor++ % num_shards].push_back(index);
    }
  } else {
    // Stratified: shuffle within each class, then keep one global round-robin
    // cursor so shard sizes still differ by at most one.
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < count; ++i) by_class[labels[i]].push_back(i);
    for (auto& [label, members] : by_class) {
      FisherYates(members, rng);
      for (std::size_t index : members) {
        shards[cursor++ % num_shards].push_back(index);
      }
    }
  }
  return shards;
}

std::vector<double> NoisyClassRatio(const std::vector<int>& labels,
                                    int num_classes, double epsilon,
                                    RngStream& rng, PrivacyLedger* ledger) {
  if (labels.empty()) {
    throw std::invalid_argument("need at least one label");
  }
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("epsilon must be positive");
  }
  if (num_classes < 1) {
    throw std::invalid_argument("need at least one class");
  }
  std::vector<double> noisy(num_classes, 0.0);
  std::vector<double> counts(num_classes, 0.0);
  for (int label : labels) {
    if (label < 0 || label >= num_classes) {
      throw std::invalid_argument("label out of range");
    }
    counts[label] += 1.0;
  }
  const double scale = 1.0 / epsilon;  // sensitivity 1 per count
  double total = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    noisy[c] = std::max(0.0, counts[c] + rng.Laplace(scale));
    total += noisy[c];
  }
  if (total <= 0.0) {
    std::cerr << "warning: all noisy class counts are zero; "
                 "falling back to uniform ratios\n";
    std::fill(noisy.begin(), noisy.end(),
              1.0 / static_cast<double>(num_classes));
  } else {
    for (double& v : noisy) v /= total;
  }
  if (ledger != nullptr) {
    ledger->AddLaplace("class-ratio", epsilon);
  }
  return noisy;
}

std::string RunLogLine(const IterationMetrics& metrics) {
  char buffer[256];
  std::snprintf(buffer, sizeof(buffer),
                "iter=%06d gen_loss=%.17g pass_rate=%.17g mean_gap=%.17g "
                "epsilon=%.17g",
                metrics.iteration, metrics.gen_loss, metrics.pass_rate,
                metrics.mean_vote_gap, metrics.epsilon);
  return buffer;
}

TrainResult Train(const TrainConfig& config, const TabularDataset& dataset,
                  const TrainCallbacks& callbacks) {
  config.Validate();
  if (dataset.Size() == 0) {
    throw std::invalid_argument("dataset is empty");
  }
  if (static_cast<std::size_t>(config.num_teachers) > dataset.Size()) {
    throw std::invalid_argument("more teachers than records");
  }
  if (config.conditional && !dataset.Labeled()) {
    throw std::invalid_argument("conditional training needs a labeled dataset");
  }
  const int data_dim = dataset.Dim();
  if (config.proj_dims > data_dim) {
    throw std::invalid_argument("proj_dims exceeds the data dimension");
  }
  const int num_classes = config.conditional ? dataset.num_classes : 0;
  const uint64_t master = config.seed;

  TrainResult result;
  RunState& state = result.state;

  // Laplace class-ratio query: the one non-Gaussian interaction with the
  // sensitive data.
  if (config.conditional) {
    RngStream laplace_rng(DeriveSeed(master, SeedDomain::kLaplace, 0));
    state.class_ratios =
        NoisyClassRatio(dataset.labels, num_classes, config.ratio_epsilon,
                        laplace_rng, &state.ledger);
  }

  if (config.epsilon_target > 0.0 &&
      state.ledger.FinalGuarantee(config.delta).epsilon >=
          config.epsilon_target) {
    throw BudgetError("privacy budget exhausted before the first iteration");
  }

  // Teachers on disjoint shards.
  const std::vector<std::vector<std::size_t>> shards =
      Partition(dataset.Size(), config.conditional ? dataset.labels
                                                   : std::vector<int>{},
                config.num_teachers, master);
  std::vector<Teacher> teachers;
  teachers.reserve(config.num_teachers);
  for (int t = 0; t < config.num_teachers; ++t) {
    RngStream init(DeriveSeed(master, SeedDomain::kTeacherInit,
                              static_cast<uint64_t>(t)));
    Mlp disc = MakeDiscriminator(data_dim, num_classes, config.hidden_units,
                                 init);
    AdamState opt = MakeAdamState(disc);
    teachers.push_back(Teacher{
        std::move(disc), std::move(opt), ShardView(dataset, shards[t]),
        RngStream(DeriveSeed(master, SeedDomain::kTeacherData,
                             static_cast<uint64_t>(t)))});
  }

  RngStream gen_init(DeriveSeed(master, SeedDomain::kGeneratorInit, 0));
  result.generator = MakeGenerator(config.noise_dim, num_classes,
                                   config.hidden_units, data_dim, gen_init);
  AdamState gen_opt = MakeAdamState(result.generator);

  RngStream latent(DeriveSeed(master, SeedDomain::kLatent, 0));
  RngStream label_stream(DeriveSeed(master, SeedDomain::kLabel, 0));
  RngStream noise(DeriveSeed(master, SeedDomain::kNoise, 0));

  const BinGrid grid(config.clip, config.num_bins);
  uint64_t query_counter = 0;

  // On a numeric failure mid-iteration, checkpoint the last consistent
  // generator before propagating.
  const auto abort_with_checkpoint = [&](int iteration) {
    if (callbacks.on_checkpoint) {
      callbacks.on_checkpoint(iteration, result.generator);
    }
  };

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    // Stop before the budget would be overshot, never after.
    if (config.epsilon_target > 0.0) {
      const RdpCurve worst_case =
          IterationWorstCase(config, state.ledger.Composed().orders);
      const DpGuarantee projected =
          state.ledger.ProjectWithExtra(worst_case, config.delta);
      if (projected.epsilon > config.epsilon_target) {
        state.stopped_on_budget = true;
        break;
      }
    }

    double gen_loss = 0.0;
    double pass_sum = 0.0;
    double gap_sum = 0.0;
    try {
      // (1) Fake batch.
      std::vector<std::vector<double>> z_batch(config.batch_size);
      std::vector<std::vector<double>> fake_labels(config.batch_size);
      std::vector<std::vector<double>> fakes(config.batch_size);
      for (int r = 0; r < config.batch_size; ++r) {
        z_batch[r].resize(config.noise_dim);
        for (double& v : z_batch[r]) v = latent.Gaussian();
        if (config.conditional) {
          const int label =
              static_cast<int>(label_stream.UniformBelow(num_classes));
          fake_labels[r] = OneHot(label, num_classes);
        }
        fakes[r] = Forward(result.generator, z_batch[r],
                           config.conditional ? fake_labels[r]
                                              : std::vector<double>{});
      }

      // (2) Teacher updates and per-record perturbations, in parallel across
      // teachers. The ledger is not touched here; a barrier (the join)
      // precedes aggregation.
      std::vector<std::vector<std::vector<double>>> perturbations(
          config.batch_size,
          std::vector<std::vector<double>>(config.num_teachers));
      ForEachTeacher(config.num_teachers, [&](int t) {
        Teacher& teacher = teachers[t];
        for (int step = 0; step < config.teacher_steps; ++step) {
          std::vector<std::vector<double>> real_batch(config.batch_size);
          std::vector<std::vector<double>> real_labels;
          if (config.conditional) real_labels.resize(config.batch_size);
          for (int r = 0; r < config.batch_size; ++r) {
            const std::size_t pick =
                teacher.data_stream.UniformBelow(teacher.shard.Size());
            real_batch[r] = teacher.shard.Features(pick);
            if (config.conditional) {
              real_labels[r] = OneHot(teacher.shard.Label(pick), num_classes);
            }
          }
          TeacherStep(teacher.discriminator, teacher.optimizer, real_batch,
                      real_labels, fakes,
                      config.conditional ? fake_labels
                                         : std::vector<std::vector<double>>{},
                      config.learning_rate);
        }
        for (int r = 0; r < config.batch_size; ++r) {
          perturbations[r][t] = AdversarialPerturbation(
              teacher.discriminator, fakes[r],
              config.conditional ? fake_labels[r] : std::vector<double>{},
              config.clip);
        }
      });

      // (3) Private aggregation, one query per record.
      std::vector<std::vector<double>> x_hat(config.batch_size);
      for (int r = 0; r < config.batch_size; ++r) {
        const ProjectionPair projection = MakeProjection(
            data_dim, config.proj_dims,
            DeriveSeed(master, SeedDomain::kProjection, query_counter),
            config.back_projection);
        char query_id[64];
        std::snprintf(query_id, sizeof(query_id), "q%08llu",
                      static_cast<unsigned long long>(query_counter));
        ++query_counter;
        AggregationOutcome outcome;
        const std::vector<double> aggregated = DpGradAgg(
            perturbations[r], grid, projection, config.threshold,
            config.sigma1, config.sigma2, &state.ledger, query_id, noise,
            &outcome);
        pass_sum += outcome.PassRate();
        gap_sum += outcome.MeanVoteGap();
        if (r == 0 && config.dump_tally_every > 0 &&
            iter % config.dump_tally_every == 0 && callbacks.on_tally) {
          callbacks.on_tally(iter, outcome.tally);
        }
        x_hat[r].resize(data_dim);
        for (int c = 0; c < data_dim; ++c) {
          x_hat[r][c] = fakes[r][c] + aggregated[c];
        }
      }

      // (4) Generator step toward the perturbed targets.
      gen_loss = GeneratorStep(
          result.generator, gen_opt, z_batch,
          config.conditional ? fake_labels
                             : std::vector<std::vector<double>>{},
          x_hat, config.learning_rate);
    } catch (const std::runtime_error&) {
      abort_with_checkpoint(iter - 1);
      throw;
    }

    state.iterations = iter;
    IterationMetrics metrics;
    metrics.iteration = iter;
    metrics.gen_loss = gen_loss;
    metrics.pass_rate = pass_sum / config.batch_size;
    metrics.mean_vote_gap = gap_sum / config.batch_size;
    metrics.epsilon = state.ledger.FinalGuarantee(config.delta).epsilon;
    state.metrics.push_back(metrics);
    if (callbacks.on_iteration) callbacks.on_iteration(metrics);
    if (callbacks.on_checkpoint && config.checkpoint_every > 0 &&
        iter % config.checkpoint_every == 0) {
      callbacks.on_checkpoint(iter, result.generator);
    }
  }

  state.guarantee = state.ledger.FinalGuarantee(config.delta);
  return result;
}

SyntheticBatch Generate(const Mlp& generator, std::size_t count,
                        const std::vector<double>& class_ratios,
                        uint64_t seed) {
  if (!class_ratios.empty()) {
    double sum = 0.0;
    for (double ratio : class_ratios) {
      if (ratio < 0.0) {
        throw std::invalid_argument("class ratios must be nonnegative");
      }
      sum += ratio;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("class ratios must sum to 1");
    }
    if (static_cast<int>(class_ratios.size()) != generator.label_dim) {
      throw std::invalid_argument("class ratios do not match the generator");
    }
  } else if (generator.label_dim != 0) {
    throw std::invalid_argument("conditional generator needs class ratios");
  }

  SyntheticBatch batch;
  RngStream label_rng(DeriveSeed(seed, SeedDomain::kLabel, 0));
  RngStream z_rng(DeriveSeed(seed, SeedDomain::kLatent, 0));
  batch.records.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> label;
    if (!class_ratios.empty()) {
      const double u = label_rng.Uniform01();
      double cumulative = 0.0;
      int chosen = static_cast<int>(class_ratios.size()) - 1;
      for (std::size_t c = 0; c < class_ratios.size(); ++c) {
        cumulative += class_ratios[c];
        if (u < cumulative) {
          chosen = static_cast<int>(c);
          break;
        }
      }
      batch.labels.push_back(chosen);
      label = OneHot(chosen, static_cast<int>(class_ratios.size()));
    }
    std::vector<double> z(generator.input_dim);
    for (double& v : z) v = z_rng.Gaussian();
    batch.records.push_back(Forward(generator, z, label));
  }
  return batch;
}

}  // namespace dpsynth

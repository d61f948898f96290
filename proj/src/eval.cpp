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

#include "dpsynth/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dpsynth {

namespace {

constexpr int kLrIterations = 1000;
constexpr double kLrLearningRate = 0.5;
constexpr double kLrL2 = 1e-6;

void SoftmaxInPlace(std::vector<double>& logits) {
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - max_logit);
    sum += v;
  }
  for (double& v : logits) v /= sum;
}

// Indices sorted by score descending, grouped by exact score equality.
std::vector<std::size_t> SortedByScoreDesc(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return scores[a] > scores[b];
                   });
  return order;
}

void CheckBinaryInputs(std::span<const double> scores,
                       std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("scores and labels must align and be nonempty");
  }
}

}  // namespace

nlohmann::ordered_json EvalReport::ToJson() const {
  nlohmann::ordered_json doc;
  doc["classifier"] = classifier;
  doc["auroc"] = auroc;
  doc["auprc"] = auprc;
  doc["accuracy"] = accuracy;
  doc["train_size"] = train_size;
  doc["test_size"] = test_size;
  doc["seed"] = seed;
  return doc;
}

void LogisticRegression::Train(const std::vector<std::vector<double>>& features,
                               const std::vector<int>& labels,
                               int num_classes) {
  if (features.empty() || features.size() != labels.size()) {
    throw std::invalid_argument("features and labels must align");
  }
  if (num_classes < 2) {
    throw std::invalid_argument(
        "training set must contain at least two classes");
  }
  num_classes_ = num_classes;
  dim_ = static_cast<int>(features[0].size());
  weights_.assign(static_cast<std::size_t>(num_classes_) * dim_, 0.0);
  biases_.assign(num_classes_, 0.0);

  const double n = static_cast<double>(features.size());
  std::vector<double> grad_w(weights_.size());
  std::vector<double> grad_b(biases_.size());
  std::vector<double> probs(num_classes_);
  for (int iter = 0; iter < kLrIterations; ++iter) {
    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    std::fill(grad_b.begin(), grad_b.end(), 0.0);
    for (std::size_t r = 0; r < features.size(); ++r) {
      const std::vector<double>& x = features[r];
      for (int c = 0; c < num_classes_; ++c) {
        double z = biases_[c];
        const double* w = &weights_[static_cast<std::size_t>(c) * dim_];
        for (int j = 0; j < dim_; ++j) z += w[j] * x[j];
        probs[c] = z;
      }
      SoftmaxInPlace(probs);
      for (int c = 0; c < num_classes_; ++c) {
        const double residual = probs[c] - (labels[r] == c ? 1.0 : 0.0);
        double* gw = &grad_w[static_cast<std::size_t>(c) * dim_];
        for (int j = 0; j < dim_; ++j) gw[j] += residual * x[j];
        grad_b[c] += residual;
      }
    }
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      weights_[i] -=
          kLrLearningRate * (grad_w[i] / n + kLrL2 * weights_[i]);
    }
    for (int c = 0; c < num_classes_; ++c) {
      biases_[c] -= kLrLearningRate * grad_b[c] / n;
    }
  }
}

std::vector<double> LogisticRegression::PredictProba(
    std::span<const double> features) const {
  if (static_cast<int>(features.size()) != dim_) {
    throw std::invalid_argument("feature length does not match classifier");
  }
  std::vector<double> probs(num_classes_);
  for (int c = 0; c < num_classes_; ++c) {
    double z = biases_[c];
    const double* w = &weights_[static_cast<std::size_t>(c) * dim_];
    for (int j = 0; j < dim_; ++j) z += w[j] * features[j];
    probs[c] = z;
  }
  SoftmaxInPlace(probs);
  return probs;
}

int LogisticRegression::Predict(std::span<const double> features) const {
  const std::vector<double> probs = PredictProba(features);
  return static_cast<int>(
      std::max_element(probs.begin(), probs.end()) - probs.begin());
}

double AurocBinary(std::span<const double> scores,
                   std::span<const int> labels) {
  CheckBinaryInputs(scores, labels);
  long long positives = 0;
  long long negatives = 0;
  for (int label : labels) {
    if (label == 1) {
      ++positives;
    } else {
      ++negatives;
    }
  }
  if (positives == 0 || negatives == 0) {
    throw std::invalid_argument("AUROC needs both classes in the test set");
  }
  const std::vector<std::size_t> order = SortedByScoreDesc(scores);
  // Integer trapezoid numerator: sum of dFP * (TP_before + TP_after) over
  // groups of tied scores. Dividing once by 2*P*N keeps the result exactly
  // equal to the pairwise half-credit count.
  long long numerator = 0;
  long long tp = 0;
  long long fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    long long tp_group = 0;
    long long fp_group = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] == 1) {
        ++tp_group;
      } else {
        ++fp_group;
      }
      ++j;
    }
    numerator += fp_group * (2 * tp + tp_group);
    tp += tp_group;
    fp += fp_group;
    i = j;
  }
  return static_cast<double>(numerator) /
         (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
}

double AuprcBinary(std::span<const double> scores,
                   std::span<const int> labels) {
  CheckBinaryInputs(scores, labels);
  long long positives = 0;
  for (int label : labels) positives += label == 1 ? 1 : 0;
  if (positives == 0) {
    throw std::invalid_argument("AUPRC needs at least one positive");
  }
  const std::vector<std::size_t> order = SortedByScoreDesc(scores);
  double area = 0.0;
  long long tp = 0;
  long long seen = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    long long tp_group = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      tp_group += labels[order[j]] == 1 ? 1 : 0;
      ++j;
    }
    seen += static_cast<long long>(j - i);
    tp += tp_group;
    if (tp_group > 0) {
      const double precision =
          static_cast<double>(tp) / static_cast<double>(seen);
      const double recall_step =
          static_cast<double>(tp_group) / static_cast<double>(positives);
      area += precision * recall_step;
    }
    i = j;
  }
  // The exact value is in [0, 1]; the accumulation may drift an ulp past it.
  return std::clamp(area, 0.0, 1.0);
}

EvalReport EvalDownstream(const TabularDataset& synthetic,
                          const TabularDataset& real_test,
                          const std::string& classifier, uint64_t seed) {
  if (classifier != "logistic-regression") {
    throw std::invalid_argument("unknown classifier: " + classifier);
  }
  if (!synthetic.Labeled() || !real_test.Labeled()) {
    throw std::invalid_argument("evaluation needs labeled datasets");
  }
  if (synthetic.feature_names != real_test.feature_names) {
    throw std::invalid_argument("synthetic and real schemas do not match");
  }
  if (synthetic.Size() == 0 || real_test.Size() == 0) {
    throw std::invalid_argument("datasets must be nonempty");
  }
  const int num_classes = std::max(synthetic.num_classes, real_test.num_classes);

  LogisticRegression model;
  model.Train(synthetic.features, synthetic.labels, num_classes);

  // Map test rows into the synthetic dataset's feature scaling so train and
  // test features agree.
  std::vector<std::vector<double>> test_features(real_test.Size());
  for (std::size_t r = 0; r < real_test.Size(); ++r) {
    const std::vector<double> raw = real_test.RawRow(r);
    std::vector<double> scaled(raw.size());
    for (std::size_t c = 0; c < raw.size(); ++c) {
      scaled[c] = synthetic.scaler.Scale(static_cast<int>(c), raw[c]);
    }
    test_features[r] = std::move(scaled);
  }

  std::vector<std::vector<double>> probs(real_test.Size());
  std::size_t correct = 0;
  for (std::size_t r = 0; r < real_test.Size(); ++r) {
    probs[r] = model.PredictProba(test_features[r]);
    const int predicted = static_cast<int>(
        std::max_element(probs[r].begin(), probs[r].end()) - probs[r].begin());
    if (predicted == real_test.labels[r]) ++correct;
  }

  EvalReport report;
  report.classifier = classifier;
  report.train_size = synthetic.Size();
  report.test_size = real_test.Size();
  report.seed = seed;
  report.accuracy = static_cast<double>(correct) /
                    static_cast<double>(real_test.Size());

  if (num_classes == 2) {
    std::vector<double> scores(real_test.Size());
    for (std::size_t r = 0; r < real_test.Size(); ++r) scores[r] = probs[r][1];
    report.auroc = AurocBinary(scores, real_test.labels);
    report.auprc = AuprcBinary(scores, real_test.labels);
  } else {
    // Macro one-vs-rest average over classes present in the test set.
    double auroc_sum = 0.0;
    double auprc_sum = 0.0;
    int counted = 0;
    for (int c = 0; c < num_classes; ++c) {
      std::vector<double> scores(real_test.Size());
      std::vector<int> onevsrest(real_test.Size());
      long long positives = 0;
      for (std::size_t r = 0; r < real_test.Size(); ++r) {
        scores[r] = probs[r][c];
        onevsrest[r] = real_test.labels[r] == c ? 1 : 0;
        positives += onevsrest[r];
      }
      if (positives == 0 ||
          positives == static_cast<long long>(real_test.Size())) {
        continue;
      }
      auroc_sum += AurocBinary(scores, onevsrest);
      auprc_sum += AuprcBinary(scores, onevsrest);
      ++counted;
    }
    if (counted == 0) {
      throw std::invalid_argument("test set has a single class");
    }
    report.auroc = auroc_sum / counted;
    report.auprc = auprc_sum / counted;
  }
  return report;
}

}  // namespace dpsynth

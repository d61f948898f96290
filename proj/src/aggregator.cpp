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

#include "dpsynth/aggregator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dpsynth {

BinGrid::BinGrid(double clip, int num_bins) : clip(clip), num_bins(num_bins) {
  if (!(clip > 0.0) || !std::isfinite(clip)) {
    throw std::invalid_argument("clip bound must be positive and finite");
  }
  if (num_bins < 2) {
    throw std::invalid_argument("need at least 2 bins");
  }
}

int BinGrid::BinIndex(double value) const {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("cannot discretize non-finite value");
  }
  const double clamped = std::clamp(value, -clip, clip);
  int index = static_cast<int>(std::floor((clamped + clip) / Width()));
  if (index >= num_bins) index = num_bins - 1;  // top boundary and fp slack
  if (index < 0) index = 0;
  return index;
}

std::vector<int> Discretize(std::span<const double> values,
                            const BinGrid& grid) {
  std::vector<int> indices(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    indices[i] = grid.BinIndex(values[i]);
  }
  return indices;
}

VoteTally Tally(const std::vector<std::vector<int>>& votes_per_teacher,
                int bins) {
  const int dims =
      votes_per_teacher.empty() ? 0 : static_cast<int>(votes_per_teacher[0].size());
  VoteTally tally(dims, bins);
  for (const std::vector<int>& votes : votes_per_teacher) {
    if (static_cast<int>(votes.size()) != dims) {
      throw std::logic_error("teacher vote vectors disagree on dimension");
    }
    for (int d = 0; d < dims; ++d) {
      const int bin = votes[d];
      if (bin < 0 || bin >= bins) {
        throw std::logic_error("vote bin index out of range");
      }
      ++tally.counts[static_cast<std::size_t>(d) * bins + bin];
    }
  }
  return tally;
}

std::string TallyToCsv(const VoteTally& tally) {
  std::ostringstream out;
  for (int b = 0; b < tally.bins; ++b) {
    out << (b == 0 ? "" : ",") << "bin" << b;
  }
  out << '\n';
  for (int d = 0; d < tally.dims; ++d) {
    for (int b = 0; b < tally.bins; ++b) {
      out << (b == 0 ? "" : ",") << tally.At(d, b);
    }
    out << '\n';
  }
  return out.str();
}

GnmaxOutcome ConfidentGnmax(std::span<const int> counts, double threshold,
                            double sigma1, double sigma2, RngStream& rng) {
  if (counts.size() < 2) {
    throw std::invalid_argument("need at least 2 vote counts");
  }
  if (sigma1 < 0.0 || sigma2 < 0.0) {
    throw std::invalid_argument("noise std-dev must be nonnegative");
  }
  if (threshold < 0.0) {
    throw std::invalid_argument("threshold must be nonnegative");
  }

  GnmaxOutcome outcome;
  int top[3] = {0, 0, 0};
  for (int count : counts) {
    if (count > top[0]) {
      top[2] = top[1];
      top[1] = top[0];
      top[0] = count;
    } else if (count > top[1]) {
      top[2] = top[1];
      top[1] = count;
    } else if (count > top[2]) {
      top[2] = count;
    }
  }
  outcome.n1 = top[0];
  outcome.n2 = top[1];
  outcome.n3 = top[2];

  const double noisy_max =
      outcome.n1 + (sigma1 > 0.0 ? rng.Gaussian(0.0, sigma1) : 0.0);
  if (noisy_max < threshold) return outcome;

  outcome.passed = true;
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < counts.size(); ++b) {
    const double score =
        counts[b] + (sigma2 > 0.0 ? rng.Gaussian(0.0, sigma2) : 0.0);
    if (score > best_score) {  // strict: zero-noise ties keep the lowest bin
      best_score = score;
      best = static_cast<int>(b);
    }
  }
  outcome.winner = best;
  return outcome;
}

double AggregationOutcome::PassRate() const {
  if (dims.empty()) return 0.0;
  std::size_t passed = 0;
  for (const AggregationRecord& rec : dims) passed += rec.passed ? 1 : 0;
  return static_cast<double>(passed) / static_cast<double>(dims.size());
}

double AggregationOutcome::MeanVoteGap() const {
  if (dims.empty()) return 0.0;
  double gap = 0.0;
  for (const AggregationRecord& rec : dims) gap += rec.n1 - rec.n2;
  return gap / static_cast<double>(dims.size());
}

std::vector<double> DpGradAgg(
    const std::vector<std::vector<double>>& teacher_gradients,
    const BinGrid& grid, const ProjectionPair& projection,
    double threshold_fraction, double sigma1, double sigma2,
    PrivacyLedger* ledger, std::string_view query_id, RngStream& rng,
    AggregationOutcome* outcome) {
  if (teacher_gradients.empty()) {
    throw std::invalid_argument("need at least one teacher gradient");
  }
  if (!(threshold_fraction > 0.0 && threshold_fraction <= 1.0)) {
    throw std::invalid_argument("threshold fraction must be in (0, 1]");
  }
  const int num_teachers = static_cast<int>(teacher_gradients.size());
  const int k = projection.output_dim;

  std::vector<std::vector<int>> votes;
  votes.reserve(teacher_gradients.size());
  for (const std::vector<double>& gradient : teacher_gradients) {
    if (static_cast<int>(gradient.size()) != projection.input_dim) {
      throw std::invalid_argument(
          "teacher gradient length does not match projection d");
    }
    votes.push_back(Discretize(ProjectDown(gradient, projection), grid));
  }
  const VoteTally tally = Tally(votes, grid.num_bins);

  const double threshold_abs = std::ceil(threshold_fraction * num_teachers);
  if (ledger != nullptr) {
    ledger->AddGaussianThreshold(std::string(query_id) + "/threshold", sigma1,
                                 k);
  }

  std::vector<double> winners(k, 0.0);
  AggregationOutcome records;
  records.tally = tally;
  records.dims.resize(k);
  for (int d = 0; d < k; ++d) {
    const GnmaxOutcome gn =
        ConfidentGnmax(tally.Row(d), threshold_abs, sigma1, sigma2, rng);
    AggregationRecord& rec = records.dims[d];
    rec.passed = gn.passed;
    rec.n1 = gn.n1;
    rec.n2 = gn.n2;
    rec.n3 = gn.n3;
    if (gn.passed) {
      rec.midpoint = grid.Midpoint(gn.winner);
      winners[d] = rec.midpoint;
      if (ledger != nullptr) {
        ledger->AddGnmax(std::string(query_id) + "/dim" + std::to_string(d),
                         gn.n1, gn.n2, gn.n3, sigma2);
      }
    }
  }

  if (outcome != nullptr) *outcome = std::move(records);
  return ProjectUp(winners, projection);
}

}  // namespace dpsynth

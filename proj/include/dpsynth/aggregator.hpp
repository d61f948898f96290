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

#ifndef DPSYNTH_AGGREGATOR_HPP_
#define DPSYNTH_AGGREGATOR_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpsynth/accountant.hpp"
#include "dpsynth/projection.hpp"
#include "dpsynth/rng.hpp"

// Private aggregation of per-teacher gradient vectors: each teacher's vector
// is projected to k dimensions, each component is discretized into one of B
// equal bins over the clipped range, teachers vote per dimension for the bin
// their component falls into, a confident noisy argmax picks the winning bin
// (or rejects the dimension), and the winning bin midpoints are projected
// back to the original space.

namespace dpsynth {

// B equal bins covering [-clip, clip]. Bin j covers
// [-clip + j*w, -clip + (j+1)*w) with w = 2*clip/B; the top boundary +clip
// belongs to bin B-1. Midpoint j is -clip + (j + 0.5)*w.
struct BinGrid {
  BinGrid(double clip, int num_bins);

  double Width() const { return 2.0 * clip / num_bins; }
  double Midpoint(int bin) const { return -clip + (bin + 0.5) * Width(); }

  // Clamps the value to [-clip, clip], then bins it. Throws on non-finite
  // input.
  int BinIndex(double value) const;

  double clip;
  int num_bins;
};

// Maps each component to its bin index. Returns values.size() indices.
std::vector<int> Discretize(std::span<const double> values,
                            const BinGrid& grid);

// Per-dimension histogram of teacher votes. counts is dims x bins row-major;
// every row sums to the number of teachers tallied.
struct VoteTally {
  explicit VoteTally(int dims = 0, int bins = 0)
      : dims(dims), bins(bins),
        counts(static_cast<std::size_t>(dims) * bins, 0) {}

  int At(int dim, int bin) const { return counts[dim * bins + bin]; }
  std::span<const int> Row(int dim) const {
    return {counts.data() + static_cast<std::size_t>(dim) * bins,
            static_cast<std::size_t>(bins)};
  }

  int dims;
  int bins;
  std::vector<int> counts;
};

// Tallies one bin-index vector per teacher (all of length dims).
VoteTally Tally(const std::vector<std::vector<int>>& votes_per_teacher,
                int bins);

// CSV dump: one row per dimension, one column per bin.
std::string TallyToCsv(const VoteTally& tally);

// Outcome of one confident noisy-argmax query. n1 >= n2 >= n3 are the true
// (noise-free) top three counts, recorded for the accountant regardless of
// whether the threshold passed.
struct GnmaxOutcome {
  bool passed = false;
  int winner = -1;  // bin index, valid only when passed
  int n1 = 0;
  int n2 = 0;
  int n3 = 0;
};

// Releases the argmax bin if max(counts) + N(0, sigma1^2) >= threshold,
// where the argmax is over counts perturbed by independent N(0, sigma2^2)
// draws. sigma == 0 selects the exact zero-noise path (used by tests), in
// which argmax ties break toward the lowest bin index. Draw order: one
// Gaussian for the threshold check, then one per bin iff the check passed.
GnmaxOutcome ConfidentGnmax(std::span<const int> counts, double threshold,
                            double sigma1, double sigma2, RngStream& rng);

struct AggregationRecord {
  bool passed = false;
  double midpoint = 0.0;  // 0 for rejected dimensions
  int n1 = 0;
  int n2 = 0;
  int n3 = 0;
};

struct AggregationOutcome {
  std::vector<AggregationRecord> dims;  // one per projected dimension
  VoteTally tally;
  double PassRate() const;
  double MeanVoteGap() const;  // mean n1 - n2 over all dimensions
};

// Full aggregation of one batch-record's per-teacher gradients
// (teacher_gradients is n x d, already clipped upstream). threshold_fraction
// is turned into the absolute count ceil(threshold_fraction * n) before the
// noisy comparison. Appends one threshold entry (multiplicity k, one check
// per dimension) and one argmax entry per passed dimension to the ledger;
// pass ledger = nullptr to skip accounting (zero-noise test paths).
// Returns the aggregated gradient of length d, rejected dimensions
// contributing zero.
std::vector<double> DpGradAgg(
    const std::vector<std::vector<double>>& teacher_gradients,
    const BinGrid& grid, const ProjectionPair& projection,
    double threshold_fraction, double sigma1, double sigma2,
    PrivacyLedger* ledger, std::string_view query_id, RngStream& rng,
    AggregationOutcome* outcome = nullptr);

}  // namespace dpsynth

#endif  // DPSYNTH_AGGREGATOR_HPP_

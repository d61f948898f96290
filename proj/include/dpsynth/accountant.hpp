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

#ifndef DPSYNTH_ACCOUNTANT_HPP_
#define DPSYNTH_ACCOUNTANT_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

// Renyi-DP accounting for the noisy queries issued during training.
//
// Every noisy interaction with the sensitive data is recorded as a ledger
// entry. Gaussian-mechanism entries carry an RDP cost curve over a shared
// grid of Renyi orders; Laplace entries carry a pure-epsilon cost that is
// tracked on a side channel and added after the RDP-to-DP conversion, so
// pure-DP mechanisms compose by plain addition. All epsilon values are in
// nats.

namespace dpsynth {

// RDP cost evaluated on a grid of Renyi orders. Orders are strictly
// increasing and > 1; epsilons are nonnegative and aligned with orders.
struct RdpCurve {
  std::vector<double> orders;
  std::vector<double> epsilons;

  bool Empty() const { return orders.empty(); }
};

// Default order grid: 1.5, the integers 2..64, then 128, 256, 512, 1024.
// Data-dependent orders observed at run time are inserted as extra points.
std::vector<double> DefaultOrderGrid();

// Noisy-max threshold check with Gaussian noise of std-dev sigma: the max
// vote count has sensitivity 1, so the cost is order / (2 sigma^2) at every
// order. Requires sigma > 0 and all orders > 1.
RdpCurve GaussianThresholdRdp(double sigma, const std::vector<double>& orders);

// Result of the data-dependent noisy-argmax bound. When the vote margins are
// too small for the bound to apply, `applicable` is false and the caller
// should charge the data-independent Gaussian cost instead.
struct GnmaxRdp {
  bool applicable = false;
  double order = 0.0;    // (n1 - n2) / 4
  double epsilon = 0.0;  // exp(-2 order / sigma^2) / order
};

// Data-dependent bound for a noisy argmax over vote counts with top three
// counts n1 >= n2 >= n3 and Gaussian noise sigma. The bound is used only
// when the margins clearly dominate the noise:
//
//   n1 - n2 >= 4 sigma,  n2 - n3 >= 4 sigma,  (n1 - n2) / 4 >= 2.
//
// Otherwise returns the fallback sentinel. Requires n1 >= n2 >= n3 >= 0 and
// sigma > 0.
GnmaxRdp GnmaxDataDependentRdp(double n1, double n2, double n3, double sigma);

struct DpGuarantee {
  double epsilon = 0.0;
  double delta = 0.0;
  // Order achieving the conversion minimum; 0 when no RDP cost was involved.
  double witness_order = 0.0;
};

// Converts an RDP curve to (epsilon, delta)-DP:
//   min over orders of  eps(order) + log(1/delta) / (order - 1),
// with ties broken toward the smaller order. Requires a nonempty curve and
// delta in (0, 1).
DpGuarantee RdpToDp(const RdpCurve& curve, double delta);

enum class MechanismKind { kGaussianThreshold, kGnmaxDataDependent, kLaplace };

std::string_view ToString(MechanismKind kind);

// Append-only record of per-query privacy costs.
//
// Appends must be serialized (single-writer contract). Reads of the composed
// curve are safe to run concurrently with each other once appends have
// stopped; the composed cache is updated incrementally on every append so
// readers never observe a partially recomputed state between queries.
class PrivacyLedger {
 public:
  struct Entry {
    std::string id;
    MechanismKind kind;
    double sigma = 0.0;        // Gaussian kinds only
    int multiplicity = 1;      // identical queries folded into one entry
    bool data_dependent = false;
    double order = 0.0;        // data-dependent entries only
    double epsilon = 0.0;      // data-dependent RDP eps, or Laplace pure eps

    // RDP cost of this entry at one Renyi order.
    double EpsilonAt(double at_order) const;
  };

  PrivacyLedger() : PrivacyLedger(DefaultOrderGrid()) {}
  explicit PrivacyLedger(std::vector<double> orders);

  // One noisy-max threshold check (or `multiplicity` of them folded into a
  // single entry, e.g. the per-dimension checks of one aggregation query).
  void AddGaussianThreshold(std::string id, double sigma, int multiplicity = 1);

  // One noisy argmax. Applies the data-dependent gate; on pass the entry is
  // charged exp(-2 order / sigma^2) / order at its own order (never more than
  // the data-independent cost) and the data-independent cost order / sigma^2
  // elsewhere; on fallback the data-independent cost is charged everywhere.
  // The data-independent cost is a Gaussian over the count vector with L2
  // sensitivity sqrt(2). Returns the gate decision.
  GnmaxRdp AddGnmax(std::string id, double n1, double n2, double n3,
                    double sigma);

  // Pure epsilon-DP cost (Laplace side channel).
  void AddLaplace(std::string id, double pure_epsilon);

  const std::vector<Entry>& entries() const { return entries_; }
  bool Empty() const { return entries_.empty(); }
  std::size_t QueryCount() const;

  // Pointwise sum of all Gaussian-kind entries over the order grid.
  const RdpCurve& Composed() const { return composed_; }

  double LaplaceTotal() const { return laplace_total_; }

  // Conversion of the composed RDP curve alone (no Laplace side channel).
  DpGuarantee ComposedToDp(double delta) const;

  // Final guarantee: RDP conversion plus the Laplace side channel. An empty
  // ledger reports epsilon = 0 (no query was ever answered).
  DpGuarantee FinalGuarantee(double delta) const;

  // Guarantee if `extra` were appended, without appending it. `extra` must
  // use this ledger's order grid. Used for the pre-iteration budget check.
  DpGuarantee ProjectWithExtra(const RdpCurve& extra, double delta) const;

  // Privacy report document; see docs in README for the schema.
  nlohmann::ordered_json Report(double delta) const;
  void WriteReport(const std::filesystem::path& path, double delta) const;

 private:
  void AppendToComposed(const Entry& entry);
  void InsertOrder(double order);

  std::vector<Entry> entries_;
  RdpCurve composed_;
  double laplace_total_ = 0.0;
  std::size_t gaussian_entries_ = 0;
};

}  // namespace dpsynth

#endif  // DPSYNTH_ACCOUNTANT_HPP_

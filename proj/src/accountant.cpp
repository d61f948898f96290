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

#include "dpsynth/accountant.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <utility>

namespace dpsynth {

namespace {

constexpr double kMinGateOrder = 2.0;
constexpr double kGateSigmaMultiple = 4.0;

void CheckOrderGrid(const std::vector<double>& orders) {
  if (orders.empty()) {
    throw std::invalid_argument("order grid must be nonempty");
  }
  for (std::size_t i = 0; i < orders.size(); ++i) {
    if (!(orders[i] > 1.0)) {
      throw std::invalid_argument("Renyi orders must be > 1");
    }
    if (i > 0 && !(orders[i] > orders[i - 1])) {
      throw std::invalid_argument("Renyi orders must be strictly increasing");
    }
  }
}

}  // namespace

std::vector<double> DefaultOrderGrid() {
  std::vector<double> orders;
  orders.push_back(1.5);
  for (int i = 2; i <= 64; ++i) orders.push_back(static_cast<double>(i));
  for (double order : {128.0, 256.0, 512.0, 1024.0}) orders.push_back(order);
  return orders;
}

RdpCurve GaussianThresholdRdp(double sigma,
                              const std::vector<double>& orders) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("sigma must be positive");
  }
  CheckOrderGrid(orders);
  RdpCurve curve;
  curve.orders = orders;
  curve.epsilons.reserve(orders.size());
  for (double order : orders) {
    curve.epsilons.push_back(order / (2.0 * sigma * sigma));
  }
  return curve;
}

GnmaxRdp GnmaxDataDependentRdp(double n1, double n2, double n3, double sigma) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("sigma must be positive");
  }
  if (n1 < n2 || n2 < n3 || n3 < 0.0) {
    throw std::invalid_argument("vote counts must satisfy n1 >= n2 >= n3 >= 0");
  }
  GnmaxRdp result;
  const double gap = n1 - n2;
  const double order = gap / 4.0;
  const bool gate = gap >= kGateSigmaMultiple * sigma &&
                    (n2 - n3) >= kGateSigmaMultiple * sigma &&
                    order >= kMinGateOrder;
  if (!gate) return result;  // fallback sentinel
  result.applicable = true;
  result.order = order;
  result.epsilon = std::exp(-2.0 * order / (sigma * sigma)) / order;
  return result;
}

DpGuarantee RdpToDp(const RdpCurve& curve, double delta) {
  if (curve.Empty()) {
    throw std::invalid_argument("cannot convert an empty RDP curve");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must be in (0, 1)");
  }
  const double log_inv_delta = std::log(1.0 / delta);
  DpGuarantee best;
  best.delta = delta;
  best.epsilon = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < curve.orders.size(); ++i) {
    const double order = curve.orders[i];
    const double candidate = curve.epsilons[i] + log_inv_delta / (order - 1.0);
    if (candidate < best.epsilon) {
      best.epsilon = candidate;
      best.witness_order = order;
    }
  }
  return best;
}

std::string_view ToString(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kGaussianThreshold:
      return "gaussian-threshold";
    case MechanismKind::kGnmaxDataDependent:
      return "gnmax-data-dependent";
    case MechanismKind::kLaplace:
      return "laplace";
  }
  return "unknown";
}

double PrivacyLedger::Entry::EpsilonAt(double at_order) const {
  switch (kind) {
    case MechanismKind::kGaussianThreshold:
      return multiplicity * at_order / (2.0 * sigma * sigma);
    case MechanismKind::kGnmaxDataDependent: {
      // Data-independent bound: Gaussian over the count vector, L2
      // sensitivity sqrt(2), hence order * 2 / (2 sigma^2).
      const double independent = at_order / (sigma * sigma);
      if (data_dependent && at_order == order) {
        return std::min(epsilon, independent);
      }
      return independent;
    }
    case MechanismKind::kLaplace:
      return 0.0;
  }
  return 0.0;
}

PrivacyLedger::PrivacyLedger(std::vector<double> orders) {
  CheckOrderGrid(orders);
  composed_.orders = std::move(orders);
  composed_.epsilons.assign(composed_.orders.size(), 0.0);
}

void PrivacyLedger::AddGaussianThreshold(std::string id, double sigma,
                                         int multiplicity) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("sigma must be positive");
  }
  if (multiplicity < 1) {
    throw std::invalid_argument("multiplicity must be >= 1");
  }
  Entry entry;
  entry.id = std::move(id);
  entry.kind = MechanismKind::kGaussianThreshold;
  entry.sigma = sigma;
  entry.multiplicity = multiplicity;
  AppendToComposed(entry);
  entries_.push_back(std::move(entry));
  ++gaussian_entries_;
}

GnmaxRdp PrivacyLedger::AddGnmax(std::string id, double n1, double n2,
                                 double n3, double sigma) {
  const GnmaxRdp rdp = GnmaxDataDependentRdp(n1, n2, n3, sigma);
  Entry entry;
  entry.id = std::move(id);
  entry.kind = MechanismKind::kGnmaxDataDependent;
  entry.sigma = sigma;
  entry.data_dependent = rdp.applicable;
  entry.order = rdp.order;
  entry.epsilon = rdp.epsilon;
  if (rdp.applicable) InsertOrder(rdp.order);
  AppendToComposed(entry);
  entries_.push_back(std::move(entry));
  ++gaussian_entries_;
  return rdp;
}

void PrivacyLedger::AddLaplace(std::string id, double pure_epsilon) {
  if (!(pure_epsilon > 0.0)) {
    throw std::invalid_argument("pure epsilon must be positive");
  }
  Entry entry;
  entry.id = std::move(id);
  entry.kind = MechanismKind::kLaplace;
  entry.epsilon = pure_epsilon;
  laplace_total_ += pure_epsilon;
  entries_.push_back(std::move(entry));
}

std::size_t PrivacyLedger::QueryCount() const { return entries_.size(); }

DpGuarantee PrivacyLedger::ComposedToDp(double delta) const {
  return RdpToDp(composed_, delta);
}

DpGuarantee PrivacyLedger::FinalGuarantee(double delta) const {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must be in (0, 1)");
  }
  DpGuarantee result;
  result.delta = delta;
  if (entries_.empty()) return result;  // nothing was ever queried
  if (gaussian_entries_ > 0) {
    result = ComposedToDp(delta);
  }
  result.epsilon += laplace_total_;
  return result;
}

DpGuarantee PrivacyLedger::ProjectWithExtra(const RdpCurve& extra,
                                            double delta) const {
  if (extra.orders.size() != composed_.orders.size()) {
    throw std::invalid_argument("extra curve must use the ledger order grid");
  }
  RdpCurve sum = composed_;
  for (std::size_t i = 0; i < sum.epsilons.size(); ++i) {
    sum.epsilons[i] += extra.epsilons[i];
  }
  DpGuarantee result = RdpToDp(sum, delta);
  result.epsilon += laplace_total_;
  return result;
}

void PrivacyLedger::AppendToComposed(const Entry& entry) {
  for (std::size_t i = 0; i < composed_.orders.size(); ++i) {
    composed_.epsilons[i] += entry.EpsilonAt(composed_.orders[i]);
  }
}

void PrivacyLedger::InsertOrder(double order) {
  const auto it = std::lower_bound(composed_.orders.begin(),
                                   composed_.orders.end(), order);
  if (it != composed_.orders.end() && *it == order) return;
  const std::size_t pos = static_cast<std::size_t>(it - composed_.orders.begin());
  composed_.orders.insert(it, order);
  double eps = 0.0;
  for (const Entry& existing : entries_) {
    eps += existing.EpsilonAt(order);
  }
  composed_.epsilons.insert(composed_.epsilons.begin() + pos, eps);
}

nlohmann::ordered_json PrivacyLedger::Report(double delta) const {
  nlohmann::ordered_json queries = nlohmann::ordered_json::array();
  for (const Entry& entry : entries_) {
    nlohmann::ordered_json query;
    query["id"] = entry.id;
    query["kind"] = ToString(entry.kind);
    switch (entry.kind) {
      case MechanismKind::kGaussianThreshold:
        query["sigma"] = entry.sigma;
        query["lambda"] = nullptr;
        query["epsilon_rdp"] = nullptr;
        break;
      case MechanismKind::kGnmaxDataDependent:
        query["sigma"] = entry.sigma;
        if (entry.data_dependent) {
          query["lambda"] = entry.order;
          query["epsilon_rdp"] = entry.epsilon;
        } else {
          query["lambda"] = nullptr;
          query["epsilon_rdp"] = nullptr;
        }
        break;
      case MechanismKind::kLaplace:
        query["sigma"] = nullptr;
        query["lambda"] = nullptr;
        query["epsilon_rdp"] = entry.epsilon;
        break;
    }
    queries.push_back(std::move(query));
  }

  const DpGuarantee final = FinalGuarantee(delta);
  nlohmann::ordered_json report;
  report["queries"] = std::move(queries);
  report["composed"] = {{"orders", composed_.orders},
                        {"epsilons", composed_.epsilons}};
  nlohmann::ordered_json final_json;
  final_json["epsilon"] = final.epsilon;
  final_json["delta"] = final.delta;
  if (gaussian_entries_ > 0) {
    final_json["witness_order"] = final.witness_order;
  } else {
    final_json["witness_order"] = nullptr;
  }
  final_json["laplace_extra"] = laplace_total_;
  report["final"] = std::move(final_json);
  return report;
}

void PrivacyLedger::WriteReport(const std::filesystem::path& path,
                                double delta) const {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open report file: " + path.string());
  }
  out << Report(delta).dump(2) << '\n';
}

}  // namespace dpsynth

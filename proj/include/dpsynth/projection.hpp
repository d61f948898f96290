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

#ifndef DPSYNTH_PROJECTION_HPP_
#define DPSYNTH_PROJECTION_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace dpsynth {

enum class BackProjection { kTranspose, kPseudoInverse };

// Gaussian random projection from `input_dim` down to `output_dim` and back.
// Forward entries are i.i.d. N(0, 1/output_dim), which makes the transpose an
// unbiased inverse in expectation: E[B F] = I for B = F^T. The pseudo-inverse
// back-projection B = F^T (F F^T)^-1 is available as an option.
//
// Immutable after construction; safe for concurrent reads. Regenerating with
// the same (dims, seed) reproduces the matrices bit-exactly.
struct ProjectionPair {
  int input_dim = 0;   // d
  int output_dim = 0;  // k, with 1 <= k <= d
  uint64_t seed = 0;
  std::vector<double> forward;   // k x d, row-major
  std::vector<double> backward;  // d x k, row-major
};

ProjectionPair MakeProjection(int input_dim, int output_dim, uint64_t seed,
                              BackProjection kind = BackProjection::kTranspose);

// Test constructor: k = d, forward = backward = identity.
ProjectionPair IdentityProjection(int dim);

// forward * v. Throws on length mismatch.
std::vector<double> ProjectDown(std::span<const double> v,
                                const ProjectionPair& p);

// backward * u. Throws on length mismatch.
std::vector<double> ProjectUp(std::span<const double> u,
                              const ProjectionPair& p);

}  // namespace dpsynth

#endif  // DPSYNTH_PROJECTION_HPP_

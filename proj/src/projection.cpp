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

#include "dpsynth/projection.hpp"

#include <cmath>
#include <stdexcept>

#include "dpsynth/rng.hpp"

namespace dpsynth {

namespace {

// Solves the k x k system (F F^T) X = F, giving backward = X^T row by row.
// Gauss-Jordan with partial pivoting; k is small everywhere in this project.
std::vector<double> PseudoInverseBackward(const std::vector<double>& forward,
                                          int d, int k) {
  std::vector<double> gram(static_cast<std::size_t>(k) * k, 0.0);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      double sum = 0.0;
      for (int c = 0; c < d; ++c) {
        sum += forward[i * d + c] * forward[j * d + c];
      }
      gram[i * k + j] = sum;
    }
  }
  // Augment with the identity and invert the Gram matrix.
  std::vector<double> inv(static_cast<std::size_t>(k) * k, 0.0);
  for (int i = 0; i < k; ++i) inv[i * k + i] = 1.0;
  for (int col = 0; col < k; ++col) {
    int pivot = col;
    for (int r = col + 1; r < k; ++r) {
      if (std::abs(gram[r * k + col]) > std::abs(gram[pivot * k + col])) {
        pivot = r;
      }
    }
    if (gram[pivot * k + col] == 0.0) {
      throw std::runtime_error("projection Gram matrix is singular");
    }
    for (int c = 0; c < k; ++c) {
      std::swap(gram[col * k + c], gram[pivot * k + c]);
      std::swap(inv[col * k + c], inv[pivot * k + c]);
    }
    const double diag = gram[col * k + col];
    for (int c = 0; c < k; ++c) {
      gram[col * k + c] /= diag;
      inv[col * k + c] /= diag;
    }
    for (int r = 0; r < k; ++r) {
      if (r == col) continue;
      const double factor = gram[r * k + col];
      if (factor == 0.0) continue;
      for (int c = 0; c < k; ++c) {
        gram[r * k + c] -= factor * gram[col * k + c];
        inv[r * k + c] -= factor * inv[col * k + c];
      }
    }
  }
  // backward = F^T * inv, shape d x k.
  std::vector<double> backward(static_cast<std::size_t>(d) * k, 0.0);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < k; ++c) {
      double sum = 0.0;
      for (int i = 0; i < k; ++i) {
        sum += forward[i * d + r] * inv[i * k + c];
      }
      backward[r * k + c] = sum;
    }
  }
  return backward;
}

}  // namespace

ProjectionPair MakeProjection(int input_dim, int output_dim, uint64_t seed,
                              BackProjection kind) {
  if (output_dim < 1 || output_dim > input_dim) {
    throw std::invalid_argument("projection requires 1 <= k <= d");
  }
  ProjectionPair pair;
  pair.input_dim = input_dim;
  pair.output_dim = output_dim;
  pair.seed = seed;
  pair.forward.resize(static_cast<std::size_t>(output_dim) * input_dim);
  RngStream rng(seed);
  const double stddev = 1.0 / std::sqrt(static_cast<double>(output_dim));
  for (double& entry : pair.forward) {
    entry = stddev * rng.Gaussian();
  }
  if (kind == BackProjection::kPseudoInverse) {
    pair.backward = PseudoInverseBackward(pair.forward, input_dim, output_dim);
  } else {
    pair.backward.resize(static_cast<std::size_t>(input_dim) * output_dim);
    for (int r = 0; r < input_dim; ++r) {
      for (int c = 0; c < output_dim; ++c) {
        pair.backward[r * output_dim + c] = pair.forward[c * input_dim + r];
      }
    }
  }
  return pair;
}

ProjectionPair IdentityProjection(int dim) {
  if (dim < 1) {
    throw std::invalid_argument("projection requires 1 <= k <= d");
  }
  ProjectionPair pair;
  pair.input_dim = dim;
  pair.output_dim = dim;
  pair.forward.assign(static_cast<std::size_t>(dim) * dim, 0.0);
  for (int i = 0; i < dim; ++i) pair.forward[i * dim + i] = 1.0;
  pair.backward = pair.forward;
  return pair;
}

std::vector<double> ProjectDown(std::span<const double> v,
                                const ProjectionPair& p) {
  if (static_cast<int>(v.size()) != p.input_dim) {
    throw std::invalid_argument("vector length does not match projection d");
  }
  std::vector<double> out(p.output_dim, 0.0);
  for (int r = 0; r < p.output_dim; ++r) {
    double sum = 0.0;
    const double* row = &p.forward[static_cast<std::size_t>(r) * p.input_dim];
    for (int c = 0; c < p.input_dim; ++c) sum += row[c] * v[c];
    out[r] = sum;
  }
  return out;
}

std::vector<double> ProjectUp(std::span<const double> u,
                              const ProjectionPair& p) {
  if (static_cast<int>(u.size()) != p.output_dim) {
    throw std::invalid_argument("vector length does not match projection k");
  }
  std::vector<double> out(p.input_dim, 0.0);
  for (int r = 0; r < p.input_dim; ++r) {
    double sum = 0.0;
    const double* row = &p.backward[static_cast<std::size_t>(r) * p.output_dim];
    for (int c = 0; c < p.output_dim; ++c) sum += row[c] * u[c];
    out[r] = sum;
  }
  return out;
}

}  // namespace dpsynth

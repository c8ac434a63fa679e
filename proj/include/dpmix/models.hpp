// Copyright 2026 The dpmix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPMIX_MODELS_HPP
#define DPMIX_MODELS_HPP

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "dpmix/rng.hpp"

namespace dpmix {

// Standard normal CDF, absolute error below 1e-12 (erfc-based).
double std_normal_cdf(double x);

struct Gaussian1D {
  double mu = 0.0;
  double sigma = 1.0;  // standard deviation, > 0
};

// Diagonal-covariance Gaussian in d dimensions; sigma holds the per-axis
// standard deviations.
struct AxisAlignedGaussian {
  std::vector<double> mu;
  std::vector<double> sigma;
};

// Degenerate distribution at a fixed location; samplable but carries no
// density. Used as a corruption contaminant.
struct PointMass {
  std::vector<double> location;
};

using Component = std::variant<Gaussian1D, AxisAlignedGaussian, PointMass>;

// Finite mixture over components of matching dimension. Weights are
// nonnegative and sum to 1 within 1e-12.
struct Mixture {
  std::vector<double> weights;
  std::vector<Component> components;
};

using Model = std::variant<Gaussian1D, AxisAlignedGaussian, PointMass, Mixture>;

// Sampler for g = (1-gamma) f + gamma h with arbitrary contaminant h.
struct CorruptedSource {
  Model target;
  double gamma = 0.0;  // in [0,1)
  Model contaminant;
};

// Row-major dataset of n samples in d dimensions.
struct Dataset {
  std::size_t dim = 1;
  std::vector<double> values;

  std::size_t rows() const { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * dim, dim};
  }
  std::vector<double> column(std::size_t j) const;
  void append_row(std::span<const double> x);
};

// Throws InvalidParameterError when a model violates its invariants
// (non-positive sigma, mismatched dimensions, weights off the simplex).
void validate(const Model& model);
void validate(const CorruptedSource& source);

std::size_t dim(const Component& c);
std::size_t dim(const Model& m);

// False when the model involves a point mass.
bool density_evaluable(const Model& m);

// Log density at x, computed in log space so far-separated mixture
// components do not underflow. Throws NumericError for point masses.
double log_density(const Model& m, std::span<const double> x);
double density(const Model& m, std::span<const double> x);

// Convenience 1-d accessors.
double log_density1d(const Model& m, double x);
double density1d(const Model& m, double x);

// CDF of a univariate model (Gaussian or mixture; point masses step).
double cdf1d(const Model& m, double x);

// n i.i.d. draws. Mixtures draw a component index from the weights, then the
// component; corrupted sources draw the target with probability 1-gamma.
Dataset sample(const Model& m, std::size_t n, RandomStream& rng);
Dataset sample(const CorruptedSource& source, std::size_t n, RandomStream& rng);
std::vector<double> sample1d(const Model& m, std::size_t n, RandomStream& rng);
std::vector<double> sample1d(const CorruptedSource& source, std::size_t n,
                             RandomStream& rng);

// One draw written into out[0..d).
void sample_one(const Model& m, RandomStream& rng, std::span<double> out);
void sample_one(const CorruptedSource& source, RandomStream& rng,
                std::span<double> out);

// Interval [lo, hi] containing all but ~1e-20 of the model's mass per
// coordinate axis; used to window quadrature. Point masses contribute their
// location.
std::pair<double, double> support_window_1d(const Model& m);

// Lifts a mixture component into a standalone model.
Model component_to_model(const Component& c);

// Mixture of univariate Gaussians from parallel parameter arrays.
Mixture mixture_of_gaussians(std::span<const double> weights,
                             std::span<const double> mus,
                             std::span<const double> sigmas);

// Canonical ordering key for exact dedup / label-invariant processing:
// compares type tag, then parameters lexicographically.
bool model_less(const Model& a, const Model& b);
bool model_equal(const Model& a, const Model& b);

}  // namespace dpmix

#endif  // DPMIX_MODELS_HPP

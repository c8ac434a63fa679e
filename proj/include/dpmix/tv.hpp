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

#ifndef DPMIX_TV_HPP
#define DPMIX_TV_HPP

#include <utility>
#include <vector>

#include "dpmix/models.hpp"
#include "dpmix/rng.hpp"

namespace dpmix {

struct TvEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  enum class Method { kClosedForm, kQuadrature, kMonteCarlo } method =
      Method::kClosedForm;
};

// Exact total variation between two univariate Gaussians via the density
// crossing points: the quadratic ln f_a = ln f_b has two roots when the
// sigmas differ, one when they match.
double tv_univariate_gaussians(const Gaussian1D& a, const Gaussian1D& b);

// Numeric TV. Univariate models use adaptive quadrature of half the L1
// distance over a window covering +-10 sigma of every component; higher
// dimensions use Monte Carlo of |p-q|/(p+q) under the mixture (p+q)/2 with a
// reported standard error. Single-Gaussian pairs short-circuit to the closed
// form. Requires effort >= 1000.
TvEstimate tv_numeric(const Model& p, const Model& q, long effort,
                      RandomStream& rng);

// Open intervals forming the Scheffe set {x : a(x) > b(x)} for univariate
// density-evaluable models. Identical parameters yield the empty set (strict
// inequality). Single-Gaussian pairs use the exact quadratic roots; mixtures
// are located by grid scan plus bisection.
using Interval = std::pair<double, double>;
std::vector<Interval> scheffe_intervals_1d(const Model& a, const Model& b);

// P_{X~model}[a(X) > b(X)]. Univariate cases integrate the model CDF over
// the crossing intervals; otherwise seeded Monte Carlo with `effort` draws.
double scheffe_mass(const Model& model, const Model& a, const Model& b,
                    long effort, RandomStream& rng);

// Fraction of data rows x with a(x) > b(x), strictly.
double empirical_mass(const Dataset& data, const Model& a, const Model& b);

// Mass the model assigns to a union of disjoint intervals.
double interval_mass(const Model& m, const std::vector<Interval>& intervals);

// Same for an ascending-sorted sample, via binary search.
double interval_empirical_mass(const std::vector<double>& sorted_data,
                               const std::vector<Interval>& intervals);

}  // namespace dpmix

#endif  // DPMIX_TV_HPP

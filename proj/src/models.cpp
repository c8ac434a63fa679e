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

#include "dpmix/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

#include "dpmix/errors.hpp"

namespace dpmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.9189385332046727;  // ln sqrt(2*pi)
constexpr double kWindowSigmas = 10.0;  // per-tail truncation error < 1e-20

double log_normal_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return -0.5 * z * z - std::log(sigma) - kLogSqrt2Pi;
}

double log_sum_exp(std::span<const double> terms) {
  double m = kNegInf;
  for (double t : terms) m = std::max(m, t);
  if (m == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - m);
  return m + std::log(acc);
}

}  // namespace

double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

Model component_to_model(const Component& c) {
  return std::visit([](const auto& v) { return Model{v}; }, c);
}

std::vector<double> Dataset::column(std::size_t j) const {
  std::vector<double> out;
  out.reserve(rows());
  for (std::size_t i = 0; i < rows(); ++i) out.push_back(values[i * dim + j]);
  return out;
}

void Dataset::append_row(std::span<const double> x) {
  if (x.size() != dim) {
    throw InvalidInputError("row dimension mismatch");
  }
  values.insert(values.end(), x.begin(), x.end());
}

namespace {

void validate_component(const Component& c) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Gaussian1D>) {
          if (!(m.sigma > 0.0) || !std::isfinite(m.sigma) ||
              !std::isfinite(m.mu)) {
            throw InvalidParameterError("gaussian requires finite mu, sigma>0");
          }
        } else if constexpr (std::is_same_v<T, AxisAlignedGaussian>) {
          if (m.mu.empty() || m.mu.size() != m.sigma.size()) {
            throw InvalidParameterError(
                "axis-aligned gaussian dimension mismatch");
          }
          for (double s : m.sigma) {
            if (!(s > 0.0) || !std::isfinite(s)) {
              throw InvalidParameterError("all sigmas must be positive");
            }
          }
          for (double v : m.mu) {
            if (!std::isfinite(v)) {
              throw InvalidParameterError("all means must be finite");
            }
          }
        } else {
          if (m.location.empty()) {
            throw InvalidParameterError("point mass needs a location");
          }
        }
      },
      c);
}

}  // namespace

void validate(const Model& model) {
  if (const auto* mix = std::get_if<Mixture>(&model)) {
    if (mix->components.empty() ||
        mix->weights.size() != mix->components.size()) {
      throw InvalidParameterError("mixture needs k>=1 matching weights");
    }
    double sum = 0.0;
    for (double w : mix->weights) {
      if (!(w >= 0.0)) {
        throw InvalidParameterError("mixture weights must be nonnegative");
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw InvalidParameterError("mixture weights must sum to 1 (1e-12)");
    }
    const std::size_t d = dim(mix->components.front());
    for (const auto& c : mix->components) {
      validate_component(c);
      if (dim(c) != d) {
        throw InvalidParameterError("mixture components must share dimension");
      }
    }
    return;
  }
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (!std::is_same_v<T, Mixture>) {
          validate_component(Component{m});
        }
      },
      model);
}

void validate(const CorruptedSource& source) {
  validate(source.target);
  validate(source.contaminant);
  if (!(source.gamma >= 0.0) || !(source.gamma < 1.0)) {
    throw InvalidParameterError("corruption gamma must lie in [0,1)");
  }
  if (dim(source.target) != dim(source.contaminant)) {
    throw InvalidParameterError("target/contaminant dimension mismatch");
  }
}

std::size_t dim(const Component& c) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Gaussian1D>) {
          return 1;
        } else if constexpr (std::is_same_v<T, AxisAlignedGaussian>) {
          return m.mu.size();
        } else {
          return m.location.size();
        }
      },
      c);
}

std::size_t dim(const Model& m) {
  if (const auto* mix = std::get_if<Mixture>(&m)) {
    return mix->components.empty() ? 0 : dim(mix->components.front());
  }
  return std::visit(
      [](const auto& v) -> std::size_t {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Mixture>) {
          return 0;  // unreachable
        } else {
          return dim(Component{v});
        }
      },
      m);
}

bool density_evaluable(const Model& m) {
  if (std::holds_alternative<PointMass>(m)) return false;
  if (const auto* mix = std::get_if<Mixture>(&m)) {
    return std::none_of(mix->components.begin(), mix->components.end(),
                        [](const Component& c) {
                          return std::holds_alternative<PointMass>(c);
                        });
  }
  return true;
}

namespace {

double log_density_component(const Component& c, std::span<const double> x) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Gaussian1D>) {
          return log_normal_pdf(x[0], m.mu, m.sigma);
        } else if constexpr (std::is_same_v<T, AxisAlignedGaussian>) {
          double acc = 0.0;
          for (std::size_t j = 0; j < m.mu.size(); ++j) {
            acc += log_normal_pdf(x[j], m.mu[j], m.sigma[j]);
          }
          return acc;
        } else {
          throw NumericError("point mass has no density");
        }
      },
      c);
}

}  // namespace

double log_density(const Model& m, std::span<const double> x) {
  if (x.size() != dim(m)) {
    throw InvalidInputError("evaluation point dimension mismatch");
  }
  if (const auto* mix = std::get_if<Mixture>(&m)) {
    std::vector<double> terms;
    terms.reserve(mix->components.size());
    for (std::size_t i = 0; i < mix->components.size(); ++i) {
      if (mix->weights[i] == 0.0) continue;
      terms.push_back(std::log(mix->weights[i]) +
                      log_density_component(mix->components[i], x));
    }
    return log_sum_exp(terms);
  }
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Mixture>) {
          return kNegInf;  // unreachable
        } else {
          return log_density_component(Component{v}, x);
        }
      },
      m);
}

double density(const Model& m, std::span<const double> x) {
  return std::exp(log_density(m, x));
}

double log_density1d(const Model& m, double x) {
  return log_density(m, std::span<const double>(&x, 1));
}

double density1d(const Model& m, double x) {
  return std::exp(log_density1d(m, x));
}

double cdf1d(const Model& m, double x) {
  if (dim(m) != 1) {
    throw InvalidInputError("cdf1d requires a univariate model");
  }
  if (const auto* g = std::get_if<Gaussian1D>(&m)) {
    return std_normal_cdf((x - g->mu) / g->sigma);
  }
  if (const auto* a = std::get_if<AxisAlignedGaussian>(&m)) {
    return std_normal_cdf((x - a->mu[0]) / a->sigma[0]);
  }
  if (const auto* p = std::get_if<PointMass>(&m)) {
    return p->location[0] <= x ? 1.0 : 0.0;
  }
  const auto& mix = std::get<Mixture>(m);
  double acc = 0.0;
  for (std::size_t i = 0; i < mix.components.size(); ++i) {
    acc += mix.weights[i] * cdf1d(component_to_model(mix.components[i]), x);
  }
  return acc;
}

namespace {

void sample_component(const Component& c, RandomStream& rng,
                      std::span<double> out) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Gaussian1D>) {
          out[0] = rng.gaussian(m.mu, m.sigma);
        } else if constexpr (std::is_same_v<T, AxisAlignedGaussian>) {
          for (std::size_t j = 0; j < m.mu.size(); ++j) {
            out[j] = rng.gaussian(m.mu[j], m.sigma[j]);
          }
        } else {
          std::copy(m.location.begin(), m.location.end(), out.begin());
        }
      },
      c);
}

}  // namespace

void sample_one(const Model& m, RandomStream& rng, std::span<double> out) {
  if (const auto* mix = std::get_if<Mixture>(&m)) {
    const double u = rng.uniform01();
    double acc = 0.0;
    std::size_t pick = mix->components.size() - 1;
    for (std::size_t i = 0; i < mix->weights.size(); ++i) {
      acc += mix->weights[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    sample_component(mix->components[pick], rng, out);
    return;
  }
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (!std::is_same_v<T, Mixture>) {
          sample_component(Component{v}, rng, out);
        }
      },
      m);
}

void sample_one(const CorruptedSource& source, RandomStream& rng,
                std::span<double> out) {
  // Drawn from the target with probability 1-gamma.
  if (rng.uniform01() < source.gamma) {
    sample_one(source.contaminant, rng, out);
  } else {
    sample_one(source.target, rng, out);
  }
}

Dataset sample(const Model& m, std::size_t n, RandomStream& rng) {
  validate(m);
  Dataset ds;
  ds.dim = dim(m);
  ds.values.resize(n * ds.dim);
  for (std::size_t i = 0; i < n; ++i) {
    sample_one(m, rng, {ds.values.data() + i * ds.dim, ds.dim});
  }
  return ds;
}

Dataset sample(const CorruptedSource& source, std::size_t n,
               RandomStream& rng) {
  validate(source);
  Dataset ds;
  ds.dim = dim(source.target);
  ds.values.resize(n * ds.dim);
  for (std::size_t i = 0; i < n; ++i) {
    sample_one(source, rng, {ds.values.data() + i * ds.dim, ds.dim});
  }
  return ds;
}

std::vector<double> sample1d(const Model& m, std::size_t n, RandomStream& rng) {
  if (dim(m) != 1) throw InvalidInputError("sample1d needs a 1-d model");
  return sample(m, n, rng).values;
}

std::vector<double> sample1d(const CorruptedSource& source, std::size_t n,
                             RandomStream& rng) {
  if (dim(source.target) != 1) {
    throw InvalidInputError("sample1d needs a 1-d source");
  }
  return sample(source, n, rng).values;
}

std::pair<double, double> support_window_1d(const Model& m) {
  if (dim(m) != 1) {
    throw InvalidInputError("support window requires a univariate model");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  auto absorb = [&](double mu, double sigma) {
    lo = std::min(lo, mu - kWindowSigmas * sigma);
    hi = std::max(hi, mu + kWindowSigmas * sigma);
  };
  auto absorb_component = [&](const Component& c) {
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Gaussian1D>) {
            absorb(v.mu, v.sigma);
          } else if constexpr (std::is_same_v<T, AxisAlignedGaussian>) {
            absorb(v.mu[0], v.sigma[0]);
          } else {
            absorb(v.location[0], 0.0);
          }
        },
        c);
  };
  if (const auto* mix = std::get_if<Mixture>(&m)) {
    for (const auto& c : mix->components) absorb_component(c);
  } else {
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (!std::is_same_v<T, Mixture>) {
            absorb_component(Component{v});
          }
        },
        m);
  }
  return {lo, hi};
}

Mixture mixture_of_gaussians(std::span<const double> weights,
                             std::span<const double> mus,
                             std::span<const double> sigmas) {
  Mixture mix;
  mix.weights.assign(weights.begin(), weights.end());
  for (std::size_t i = 0; i < mus.size(); ++i) {
    mix.components.push_back(Gaussian1D{mus[i], sigmas[i]});
  }
  validate(Model{mix});
  return mix;
}

namespace {

// Flattened (type tag, parameters) used for canonical ordering.
std::pair<int, std::vector<double>> model_key(const Model& m) {
  std::pair<int, std::vector<double>> key;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Gaussian1D>) {
          key = {0, {v.mu, v.sigma}};
        } else if constexpr (std::is_same_v<T, AxisAlignedGaussian>) {
          key.first = 1;
          key.second = v.mu;
          key.second.insert(key.second.end(), v.sigma.begin(), v.sigma.end());
        } else if constexpr (std::is_same_v<T, PointMass>) {
          key = {2, v.location};
        } else {
          key.first = 3;
          key.second = v.weights;
          for (const auto& c : v.components) {
            auto sub = model_key(component_to_model(c));
            key.second.push_back(static_cast<double>(sub.first));
            key.second.insert(key.second.end(), sub.second.begin(),
                              sub.second.end());
          }
        }
      },
      m);
  return key;
}

}  // namespace

bool model_less(const Model& a, const Model& b) {
  return model_key(a) < model_key(b);
}

bool model_equal(const Model& a, const Model& b) {
  return model_key(a) == model_key(b);
}

}  // namespace dpmix

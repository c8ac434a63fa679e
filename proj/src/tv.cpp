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

#include "dpmix/tv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpmix/errors.hpp"

namespace dpmix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadTol = 1e-10;

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  return adaptive_simpson(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb),
                          tol, 48);
}

// Roots of the log-density difference of two Gaussians with distinct sigmas,
// ascending. Solved with the numerically stable quadratic formula.
std::pair<double, double> gaussian_crossings(const Gaussian1D& a,
                                             const Gaussian1D& b) {
  const double ia = 1.0 / (a.sigma * a.sigma);
  const double ib = 1.0 / (b.sigma * b.sigma);
  const double qa = ib - ia;
  const double qb = 2.0 * (a.mu * ia - b.mu * ib);
  const double qc = b.mu * b.mu * ib - a.mu * a.mu * ia -
                    2.0 * std::log(a.sigma / b.sigma);
  const double disc = qb * qb - 4.0 * qa * qc;
  const double root = std::sqrt(std::max(disc, 0.0));
  const double q = -0.5 * (qb + std::copysign(root, qb));
  double x1 = q / qa;
  double x2 = (q == 0.0) ? -qb / (2.0 * qa) : qc / q;
  if (x1 > x2) std::swap(x1, x2);
  return {x1, x2};
}

double cdf_at(const Model& m, double x) {
  if (x == -kInf) return 0.0;
  if (x == kInf) return 1.0;
  return cdf1d(m, x);
}

}  // namespace

double tv_univariate_gaussians(const Gaussian1D& a, const Gaussian1D& b) {
  if (a.mu == b.mu && a.sigma == b.sigma) return 0.0;
  if (a.sigma == b.sigma) {
    // Single crossing at the midpoint of the means.
    return 2.0 * std_normal_cdf(std::abs(a.mu - b.mu) / (2.0 * a.sigma)) - 1.0;
  }
  const auto [x1, x2] = gaussian_crossings(a, b);
  const Model ma{a}, mb{b};
  const double da = cdf1d(ma, x2) - cdf1d(ma, x1);
  const double db = cdf1d(mb, x2) - cdf1d(mb, x1);
  return std::min(1.0, std::abs(da - db));
}

TvEstimate tv_numeric(const Model& p, const Model& q, long effort,
                      RandomStream& rng) {
  if (effort < 1000) {
    throw InvalidParameterError("tv_numeric requires effort >= 1000");
  }
  if (!density_evaluable(p) || !density_evaluable(q)) {
    throw NumericError("tv_numeric requires density-evaluable models");
  }
  if (dim(p) != dim(q)) {
    throw InvalidInputError("tv_numeric dimension mismatch");
  }

  if (const auto* gp = std::get_if<Gaussian1D>(&p)) {
    if (const auto* gq = std::get_if<Gaussian1D>(&q)) {
      return {tv_univariate_gaussians(*gp, *gq), 0.0,
              TvEstimate::Method::kClosedForm};
    }
  }

  if (dim(p) == 1) {
    const auto [plo, phi] = support_window_1d(p);
    const auto [qlo, qhi] = support_window_1d(q);
    const double lo = std::min(plo, qlo);
    const double hi = std::max(phi, qhi);
    auto f = [&](double x) {
      const double vx = std::abs(density1d(p, x) - density1d(q, x));
      if (!std::isfinite(vx)) throw NumericError("non-finite density");
      return vx;
    };
    // Panel per unit of combined support keeps kinks well separated.
    const int panels = 64;
    double acc = 0.0;
    for (int i = 0; i < panels; ++i) {
      const double a = lo + (hi - lo) * i / panels;
      const double b = lo + (hi - lo) * (i + 1) / panels;
      acc += integrate(f, a, b, kQuadTol / panels);
    }
    return {std::min(1.0, 0.5 * acc), 10.0 * kQuadTol,
            TvEstimate::Method::kQuadrature};
  }

  // Monte Carlo: x ~ (p+q)/2, h(x) = |p-q|/(p+q), TV = E[h].
  const std::size_t d = dim(p);
  std::vector<double> x(d);
  double sum = 0.0, sum_sq = 0.0;
  for (long i = 0; i < effort; ++i) {
    if (rng.bernoulli(0.5)) {
      sample_one(p, rng, x);
    } else {
      sample_one(q, rng, x);
    }
    const double lp = log_density(p, x);
    const double lq = log_density(q, x);
    if (std::isnan(lp) || std::isnan(lq)) {
      throw NumericError("non-finite density in Monte-Carlo TV");
    }
    // |p-q|/(p+q) = (1 - e^{-|lp-lq|}) / (1 + e^{-|lp-lq|}), stable in logs.
    const double e = std::exp(-std::abs(lp - lq));
    const double h = (1.0 - e) / (1.0 + e);
    sum += h;
    sum_sq += h * h;
  }
  const double n = static_cast<double>(effort);
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean);
  return {mean, std::sqrt(var / n), TvEstimate::Method::kMonteCarlo};
}

std::vector<Interval> scheffe_intervals_1d(const Model& a, const Model& b) {
  if (dim(a) != 1 || dim(b) != 1) {
    throw InvalidInputError("scheffe_intervals_1d requires univariate models");
  }
  if (!density_evaluable(a) || !density_evaluable(b)) {
    throw NumericError("Scheffe sets need density-evaluable models");
  }
  if (model_equal(a, b)) return {};

  const auto* ga = std::get_if<Gaussian1D>(&a);
  const auto* gb = std::get_if<Gaussian1D>(&b);
  if (ga != nullptr && gb != nullptr) {
    if (ga->sigma == gb->sigma) {
      if (ga->mu == gb->mu) return {};
      const double mid = 0.5 * (ga->mu + gb->mu);
      return ga->mu < gb->mu ? std::vector<Interval>{{-kInf, mid}}
                             : std::vector<Interval>{{mid, kInf}};
    }
    const auto [x1, x2] = gaussian_crossings(*ga, *gb);
    // The narrower Gaussian dominates between the crossings.
    if (ga->sigma < gb->sigma) return {{x1, x2}};
    return {{-kInf, x1}, {x2, kInf}};
  }

  // General case: locate sign changes of the log-density difference on a
  // grid refined around every component, then bisect.
  auto diff = [&](double x) { return log_density1d(a, x) - log_density1d(b, x); };
  const auto [alo, ahi] = support_window_1d(a);
  const auto [blo, bhi] = support_window_1d(b);
  const double lo = std::min(alo, blo);
  const double hi = std::max(ahi, bhi);

  std::vector<double> grid;
  const int kGlobal = 4096;
  grid.reserve(kGlobal + 2);
  for (int i = 0; i <= kGlobal; ++i) {
    grid.push_back(lo + (hi - lo) * i / kGlobal);
  }
  auto add_local = [&grid](double mu, double sigma) {
    for (int j = -12; j <= 12; ++j) grid.push_back(mu + sigma * j / 4.0);
  };
  for (const Model* m : {&a, &b}) {
    if (const auto* mix = std::get_if<Mixture>(m)) {
      for (const auto& c : mix->components) {
        if (const auto* g = std::get_if<Gaussian1D>(&c)) {
          add_local(g->mu, g->sigma);
        } else if (const auto* aa = std::get_if<AxisAlignedGaussian>(&c)) {
          add_local(aa->mu[0], aa->sigma[0]);
        }
      }
    } else if (const auto* g = std::get_if<Gaussian1D>(m)) {
      add_local(g->mu, g->sigma);
    } else if (const auto* aa = std::get_if<AxisAlignedGaussian>(m)) {
      add_local(aa->mu[0], aa->sigma[0]);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  while (!grid.empty() && grid.front() < lo) grid.erase(grid.begin());
  while (!grid.empty() && grid.back() > hi) grid.pop_back();

  auto bisect = [&](double xlo, double xhi) {
    // diff changes sign on [xlo, xhi]; refine to ~1e-13 relative.
    double flo = diff(xlo);
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (xlo + xhi);
      const double fm = diff(mid);
      if ((flo > 0.0) == (fm > 0.0)) {
        xlo = mid;
        flo = fm;
      } else {
        xhi = mid;
      }
    }
    return 0.5 * (xlo + xhi);
  };

  std::vector<Interval> out;
  bool inside = diff(grid.front()) > 0.0;
  double start = inside ? -kInf : 0.0;
  bool prev_pos = inside;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const bool pos = diff(grid[i]) > 0.0;
    if (pos != prev_pos) {
      const double root = bisect(grid[i - 1], grid[i]);
      if (pos) {
        start = root;
      } else {
        out.push_back({start, root});
      }
      prev_pos = pos;
    }
  }
  if (prev_pos) out.push_back({start, kInf});
  return out;
}

double interval_mass(const Model& m, const std::vector<Interval>& intervals) {
  double acc = 0.0;
  for (const auto& [l, r] : intervals) acc += cdf_at(m, r) - cdf_at(m, l);
  return std::clamp(acc, 0.0, 1.0);
}

double interval_empirical_mass(const std::vector<double>& sorted_data,
                               const std::vector<Interval>& intervals) {
  if (sorted_data.empty()) {
    throw InvalidInputError("empirical mass requires nonempty data");
  }
  std::size_t count = 0;
  for (const auto& [l, r] : intervals) {
    auto lo = std::upper_bound(sorted_data.begin(), sorted_data.end(), l);
    auto hi = std::upper_bound(sorted_data.begin(), sorted_data.end(), r);
    count += static_cast<std::size_t>(hi - lo);
  }
  return static_cast<double>(count) / static_cast<double>(sorted_data.size());
}

double scheffe_mass(const Model& model, const Model& a, const Model& b,
                    long effort, RandomStream& rng) {
  if (effort < 1000) {
    throw InvalidParameterError("scheffe_mass requires effort >= 1000");
  }
  if (model_equal(a, b)) return 0.0;
  if (dim(model) == 1 && dim(a) == 1 && dim(b) == 1 && density_evaluable(a) &&
      density_evaluable(b)) {
    return interval_mass(model, scheffe_intervals_1d(a, b));
  }
  if (!density_evaluable(a) || !density_evaluable(b)) {
    throw NumericError("Scheffe mass needs density-evaluable hypotheses");
  }
  std::vector<double> x(dim(model));
  long hits = 0;
  for (long i = 0; i < effort; ++i) {
    sample_one(model, rng, x);
    if (log_density(a, x) > log_density(b, x)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(effort);
}

double empirical_mass(const Dataset& data, const Model& a, const Model& b) {
  if (data.rows() == 0) {
    throw InvalidInputError("empirical_mass requires nonempty data");
  }
  if (model_equal(a, b)) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto x = data.row(i);
    if (log_density(a, x) > log_density(b, x)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.rows());
}

}  // namespace dpmix

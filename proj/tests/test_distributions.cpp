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

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "dpmix/errors.hpp"
#include "dpmix/histogram.hpp"
#include "dpmix/model_io.hpp"
#include "dpmix/models.hpp"
#include "dpmix/tv.hpp"
#include "oracles.hpp"

using namespace dpmix;

TEST_CASE("standard normal CDF against the series oracle") {
  CHECK(std_normal_cdf(0.0) == 0.5);
  CHECK(std::abs(std_normal_cdf(1.0) - oracles::phi_series(1.0)) < 1e-12);
  CHECK(std_normal_cdf(1.0) ==
        doctest::Approx(0.8413447460685429).epsilon(1e-12));
  for (double x : {-3.7, -1.2, -0.4, 0.3, 0.9, 2.1, 3.9, 5.5}) {
    CHECK(std::abs(std_normal_cdf(x) - oracles::phi_series(x)) < 1e-12);
  }
  CHECK(std_normal_cdf(-40.0) < 1e-300);  // deep tail collapses to 0
}

TEST_CASE("closed-form TV between univariate gaussians") {
  CHECK(tv_univariate_gaussians({0, 1}, {0, 1}) == 0.0);
  // Equal sigma: 2 Phi(|mu_a-mu_b| / 2 sigma) - 1.
  CHECK(tv_univariate_gaussians({0, 1}, {2, 1}) ==
        doctest::Approx(2.0 * oracles::phi_series(1.0) - 1.0).epsilon(1e-12));
  // Distinct sigma: crossing-point formula; N(0,1) vs N(0, 2^2) =
  // 0.3226745688347687, confirmed by the fixed-panel Simpson oracle.
  const double tv_unequal = tv_univariate_gaussians({0, 1}, {0, 2});
  CHECK(tv_unequal == doctest::Approx(0.3226745688347687).epsilon(1e-10));
  CHECK(std::abs(tv_unequal -
                 oracles::tv_simpson(Model{Gaussian1D{0, 1}},
                                     Model{Gaussian1D{0, 2}}, -25, 25)) <
        1e-6);
}

TEST_CASE("closed-form TV agrees with quadrature on random pairs") {
  RandomStream rng(555);
  for (int trial = 0; trial < 100; ++trial) {
    const Gaussian1D a{(rng.uniform01() - 0.5) * 10.0,
                       0.2 + rng.uniform01() * 3.0};
    const Gaussian1D b{(rng.uniform01() - 0.5) * 10.0,
                       0.2 + rng.uniform01() * 3.0};
    const double closed = tv_univariate_gaussians(a, b);
    const auto shortcut = tv_numeric(Model{a}, Model{b}, 1000, rng);
    // tv_numeric short-circuits gaussian pairs; force the quadrature path
    // through a 1-component mixture wrapper.
    const Mixture wrap_a = mixture_of_gaussians({{1.0}}, {{a.mu}}, {{a.sigma}});
    const auto quad = tv_numeric(Model{wrap_a}, Model{b}, 1000, rng);
    CHECK(shortcut.estimate == doctest::Approx(closed).epsilon(1e-12));
    CHECK(std::abs(quad.estimate - closed) < 1e-6);
    CHECK(quad.method == TvEstimate::Method::kQuadrature);
    // Symmetry and range.
    CHECK(tv_univariate_gaussians(b, a) == doctest::Approx(closed));
    CHECK(closed >= 0.0);
    CHECK(closed <= 1.0);
    if (a.mu != b.mu || a.sigma != b.sigma) CHECK(closed > 0.0);
  }
}

TEST_CASE("parameter-perturbation TV bound") {
  // |mu - mu'| <= alpha sigma and |sigma - sigma'| <= alpha sigma with
  // alpha <= 2/3 force TV <= alpha.
  RandomStream rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const double alpha = 0.01 + rng.uniform01() * (2.0 / 3.0 - 0.01);
    const double sigma = 0.1 + rng.uniform01() * 5.0;
    const double mu = (rng.uniform01() - 0.5) * 20.0;
    const double dmu = (2.0 * rng.uniform01() - 1.0) * alpha * sigma;
    const double dsigma = (2.0 * rng.uniform01() - 1.0) * alpha * sigma;
    if (sigma + dsigma <= 0.0) continue;
    const double tv =
        tv_univariate_gaussians({mu, sigma}, {mu + dmu, sigma + dsigma});
    CHECK(tv <= alpha + 1e-12);
  }
}

TEST_CASE("numeric TV: identical mixtures and far-separated components") {
  RandomStream rng(99);
  const Mixture mix =
      mixture_of_gaussians({{0.5, 0.5}}, {{-10.0, 10.0}}, {{1.0, 1.0}});
  const auto same = tv_numeric(Model{mix}, Model{mix}, 1000, rng);
  CHECK(same.estimate == doctest::Approx(0.0).epsilon(1e-9));

  // Half the mass sits 20 sigma away: TV to the single component is 1/2.
  const auto half =
      tv_numeric(Model{mix}, Model{Gaussian1D{-10.0, 1.0}}, 1000, rng);
  CHECK(half.estimate == doctest::Approx(0.5).epsilon(2e-4));
}

TEST_CASE("numeric TV: Monte-Carlo product case matches the 1-d value") {
  // Product N(0,1)^2 vs N(2,1) x N(0,1) reduces to the 1-d distance.
  const AxisAlignedGaussian p{{0.0, 0.0}, {1.0, 1.0}};
  const AxisAlignedGaussian q{{2.0, 0.0}, {1.0, 1.0}};
  RandomStream rng(123);
  const auto mc = tv_numeric(Model{p}, Model{q}, 200000, rng);
  CHECK(mc.method == TvEstimate::Method::kMonteCarlo);
  const double expected = 2.0 * oracles::phi_series(1.0) - 1.0;
  CHECK(std::abs(mc.estimate - expected) <= 4.0 * mc.std_error + 1e-3);
  CHECK(mc.std_error < 2e-3);
  CHECK_THROWS_AS(tv_numeric(Model{p}, Model{q}, 10, rng),
                  InvalidParameterError);
}

TEST_CASE("TV subadditivity across product coordinates") {
  RandomStream rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t d = 2 + static_cast<std::size_t>(rng.uniform01() * 4);
    AxisAlignedGaussian p, q;
    double bound = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      p.mu.push_back((rng.uniform01() - 0.5) * 2.0);
      p.sigma.push_back(0.5 + rng.uniform01());
      q.mu.push_back((rng.uniform01() - 0.5) * 2.0);
      q.sigma.push_back(0.5 + rng.uniform01());
      bound += tv_univariate_gaussians({p.mu[j], p.sigma[j]},
                                       {q.mu[j], q.sigma[j]});
    }
    const auto mc = tv_numeric(Model{p}, Model{q}, 60000, rng);
    CHECK(mc.estimate <= bound + 3.0 * mc.std_error);
  }
}

TEST_CASE("sampling basics") {
  RandomStream rng(5);
  CHECK(sample(Model{Gaussian1D{0, 1}}, 0, rng).rows() == 0);

  // gamma = 0 corruption is the pure target.
  CorruptedSource clean{Model{Gaussian1D{0, 1}}, 0.0,
                        Model{PointMass{{100.0}}}};
  const auto draws = sample1d(clean, 1000000, rng);
  double mean = 0.0;
  for (double x : draws) mean += x;
  mean /= static_cast<double>(draws.size());
  CHECK(std::abs(mean) < 0.01);

  // Degenerate weight: the second component is never drawn.
  Mixture degenerate;
  degenerate.weights = {1.0, 0.0};
  degenerate.components = {Gaussian1D{0, 1}, PointMass{{100.0}}};
  const auto only_first = sample1d(Model{degenerate}, 20000, rng);
  for (double x : only_first) CHECK(x != 100.0);
}

TEST_CASE("corrupted-source sampling hits the declared rate") {
  CorruptedSource src{Model{Gaussian1D{0, 1}}, 0.9, Model{PointMass{{100.0}}}};
  RandomStream rng(6);
  const auto draws = sample1d(src, 100000, rng);
  std::size_t contaminated = 0;
  for (double x : draws) contaminated += x == 100.0 ? 1 : 0;
  CHECK(static_cast<double>(contaminated) / draws.size() ==
        doctest::Approx(0.9).epsilon(0.012));
  CorruptedSource bad{Model{Gaussian1D{0, 1}}, 1.0, Model{Gaussian1D{0, 1}}};
  CHECK_THROWS_AS(validate(bad), InvalidParameterError);
}

TEST_CASE("Scheffe masses") {
  RandomStream rng(7);
  const Model a{Gaussian1D{0, 1}};
  const Model b{Gaussian1D{2, 1}};
  // A = {x < 1}; under N(0,1) that's Phi(1).
  CHECK(scheffe_mass(a, a, b, 1000, rng) ==
        doctest::Approx(oracles::phi_series(1.0)).epsilon(1e-9));
  CHECK(scheffe_mass(b, a, b, 1000, rng) ==
        doctest::Approx(1.0 - oracles::phi_series(1.0)).epsilon(1e-9));
  // Identical hypotheses: empty strict set.
  CHECK(scheffe_mass(a, a, a, 1000, rng) == 0.0);
  CHECK_THROWS_AS(scheffe_mass(a, a, b, 10, rng), InvalidParameterError);
}

TEST_CASE("Scheffe intervals cover mixture crossings") {
  // Mass on the Scheffe set minus the competitor's mass equals TV.
  RandomStream rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Mixture ma = mixture_of_gaussians(
        {{0.4, 0.6}},
        {{(rng.uniform01() - 0.5) * 8.0, (rng.uniform01() - 0.5) * 8.0}},
        {{0.5 + rng.uniform01(), 0.5 + rng.uniform01()}});
    const Mixture mb = mixture_of_gaussians(
        {{0.7, 0.3}},
        {{(rng.uniform01() - 0.5) * 8.0, (rng.uniform01() - 0.5) * 8.0}},
        {{0.5 + rng.uniform01(), 0.5 + rng.uniform01()}});
    const Model a{ma}, b{mb};
    const auto set = scheffe_intervals_1d(a, b);
    const double mass_a = interval_mass(a, set);
    const double mass_b = interval_mass(b, set);
    const double tv = oracles::tv_simpson_auto(a, b, 50000);
    CHECK(mass_a - mass_b == doctest::Approx(tv).epsilon(1e-5));
  }
}

TEST_CASE("empirical masses") {
  const Model a{Gaussian1D{0, 1}};
  const Model b{Gaussian1D{2, 1}};
  Dataset zeros;
  zeros.dim = 1;
  zeros.values.assign(50, 0.0);
  CHECK(empirical_mass(zeros, a, b) == 1.0);
  CHECK(empirical_mass(zeros, a, a) == 0.0);
  CHECK_THROWS_AS(empirical_mass(Dataset{}, a, b), InvalidInputError);

  RandomStream rng(9);
  Dataset data;
  data.dim = 1;
  data.values = sample1d(a, 10000, rng);
  CHECK(std::abs(empirical_mass(data, a, b) - oracles::phi_series(1.0)) <=
        0.011);
}

TEST_CASE("centered-pair coupling bound") {
  // P[|Z| in S] >= (1-gamma)^2 P[|Y| in S] for Z built from corrupted pairs.
  RandomStream rng(10);
  const double sigma = 1.7;
  for (double gamma : {0.2, 0.5, 0.8}) {
    CorruptedSource src{Model{Gaussian1D{3.0, sigma}}, gamma,
                        Model{Gaussian1D{40.0, 0.3}}};
    const std::size_t pairs = 50000;
    const auto draws = sample1d(src, 2 * pairs, rng);
    const auto in_s = [](double y) { return y > 0.5 && y <= 2.0; };
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pairs; ++i) {
      const double z =
          std::abs(draws[2 * i + 1] - draws[2 * i]) / std::numbers::sqrt2;
      hits += in_s(z) ? 1 : 0;
    }
    const double empirical = static_cast<double>(hits) / pairs;
    const double y_mass =
        2.0 * (std_normal_cdf(2.0 / sigma) - std_normal_cdf(0.5 / sigma));
    const double se = oracles::binomial_std_error(empirical, pairs);
    CHECK(empirical >= (1.0 - gamma) * (1.0 - gamma) * y_mass - 3.0 * se);
  }
}

TEST_CASE("bin-mass lower bounds behind the decoders") {
  // Mean bins: P[X in B_j] >= 1/3 for j = nearest bin of mu.
  RandomStream rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const double sigma = 0.2 + rng.uniform01() * 4.0;
    const double mu = (rng.uniform01() - 0.5) * 30.0;
    const double sigma_tilde = sigma * (1.0 + rng.uniform01() * 0.999);
    const auto j = nearest_unit_bin(mu, sigma_tilde);
    const double lo = (static_cast<double>(j) - 0.5) * sigma_tilde;
    const double hi = (static_cast<double>(j) + 0.5) * sigma_tilde;
    const double mass =
        std_normal_cdf((hi - mu) / sigma) - std_normal_cdf((lo - mu) / sigma);
    CHECK(mass >= 1.0 / 3.0 - 1e-9);
  }
  // Variance bins: P[|X| in B_j] >= 1/4 for 2^j < sigma <= 2^{j+1}.
  for (int trial = 0; trial < 100; ++trial) {
    const double sigma = std::exp((rng.uniform01() - 0.5) * 8.0);
    const auto j = BinPartition::dyadic().index(sigma).value();
    const double lo = std::ldexp(1.0, static_cast<int>(j));
    const double hi = std::ldexp(1.0, static_cast<int>(j) + 1);
    const double mass =
        2.0 * (std_normal_cdf(hi / sigma) - std_normal_cdf(lo / sigma));
    CHECK(mass >= 0.25 - 1e-9);
  }
}

TEST_CASE("model JSON round trips and schema errors") {
  const Mixture mix =
      mixture_of_gaussians({{0.3, 0.7}}, {{-1.0, 4.0}}, {{1.0, 2.0}});
  const auto j = model_to_json(Model{mix});
  CHECK(j.at("type") == "mixture");
  const Model back = model_from_json(j);
  CHECK(model_equal(back, Model{mix}));

  const AxisAlignedGaussian aa{{1.0, 2.0}, {0.5, 0.25}};
  CHECK(model_equal(model_from_json(model_to_json(Model{aa})), Model{aa}));

  CorruptedSource src{Model{Gaussian1D{0, 1}}, 0.25, Model{PointMass{{9.0}}}};
  const auto sj = source_to_json(src);
  const CorruptedSource back_src = source_from_json(sj);
  CHECK(back_src.gamma == 0.25);
  CHECK(model_equal(back_src.contaminant, src.contaminant));

  // Parse errors carry the field path.
  try {
    model_from_json(nlohmann::json{{"type", "mixture"}, {"weights", {1.0}}});
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("$.mus") != std::string::npos);
  }
}

TEST_CASE("CSV round trip and malformed input") {
  Dataset data;
  data.dim = 2;
  data.values = {1.5, -2.25, 3.0, 1e-17};
  const std::string csv = dataset_to_csv(data);
  atomic_write_file("/tmp/dpmix_test_ds.csv", csv);
  const Dataset back = read_csv("/tmp/dpmix_test_ds.csv");
  CHECK(back.dim == 2);
  CHECK(back.values == data.values);

  atomic_write_file("/tmp/dpmix_test_hdr.csv", "x,y\n1,2\n3,4\n");
  const Dataset with_header = read_csv("/tmp/dpmix_test_hdr.csv");
  CHECK(with_header.rows() == 2);

  atomic_write_file("/tmp/dpmix_test_bad.csv", "1,2\n3\n");
  CHECK_THROWS_AS(read_csv("/tmp/dpmix_test_bad.csv"), InvalidInputError);
}

TEST_CASE("point masses have no density") {
  const Model p{PointMass{{0.0}}};
  CHECK_FALSE(density_evaluable(p));
  CHECK_THROWS_AS(log_density1d(p, 0.0), NumericError);
  RandomStream rng(12);
  CHECK_THROWS_AS(tv_numeric(p, Model{Gaussian1D{0, 1}}, 1000, rng),
                  NumericError);
}

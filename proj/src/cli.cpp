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

#include "dpmix/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpmix/decoders.hpp"
#include "dpmix/errors.hpp"
#include "dpmix/learner.hpp"
#include "dpmix/model_io.hpp"
#include "dpmix/parallel.hpp"
#include "dpmix/tv.hpp"

namespace dpmix::cli {

namespace {

using nlohmann::json;

struct Flags {
  double epsilon = 1.0;
  double delta = 1e-6;
  double alpha = 0.25;
  double beta = 0.1;
  double gamma = 0.5;
  int k = 1;
  std::size_t d = 1;
  std::size_t n = 1000;
  int trials = 1;
  std::uint64_t seed = 1;
  double constant_c = kDefaultSampleConstant;
  double candidate_cap = 1e5;
  double dedup = 0.0;
  double sigma = 1.0;
  double sigma_tilde = 1.0;
  long effort = 1000000;
  bool force = false;
  std::string input;
  std::string output;
  std::string format = "json";
  std::string model_path;
  std::string model_b_path;
  std::string target_path;
  std::string decoder = "gaussian";
  std::string family = "univariate";
  std::string report_path;
  std::string sweep_param = "n";
  std::string sweep_values;
  std::string contest_matrix;
};

// --config supplies defaults; explicit flags override.
void apply_config(const json& j, Flags& f) {
  auto num = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).template get<std::decay_t<decltype(field)>>();
  };
  num("epsilon", f.epsilon);
  num("delta", f.delta);
  num("alpha", f.alpha);
  num("beta", f.beta);
  num("gamma", f.gamma);
  num("k", f.k);
  num("d", f.d);
  num("n", f.n);
  num("trials", f.trials);
  num("seed", f.seed);
  num("constant-C", f.constant_c);
  num("candidate-cap", f.candidate_cap);
  num("dedup", f.dedup);
  num("sigma", f.sigma);
  num("sigma-tilde", f.sigma_tilde);
  num("effort", f.effort);
  num("force", f.force);
  num("input", f.input);
  num("output", f.output);
  num("format", f.format);
  num("model", f.model_path);
  num("model-b", f.model_b_path);
  num("target", f.target_path);
  num("decoder", f.decoder);
  num("family", f.family);
  num("report", f.report_path);
  num("sweep-param", f.sweep_param);
  num("sweep-values", f.sweep_values);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int cmd_gen(const Flags& f, std::ostream& out) {
  if (f.model_path.empty() || f.output.empty()) {
    throw InvalidInputError("gen requires --model and --output");
  }
  if (f.n < 1) throw InvalidParameterError("gen requires n >= 1");
  const CorruptedSource source = read_source_file(f.model_path);
  RandomStream rng(f.seed);
  const Dataset data = sample(source, f.n, rng);
  atomic_write_file(f.output, dataset_to_csv(data));
  out << "wrote " << data.rows() << " rows x " << data.dim << " cols to "
      << f.output << "\n";
  return kOk;
}

json nested_or_flat(const std::vector<std::vector<double>>& per_coord) {
  if (per_coord.size() == 1) return per_coord[0];
  return per_coord;
}

int cmd_decode(const Flags& f, std::ostream& out) {
  if (f.input.empty()) throw InvalidInputError("decode requires --input");
  const Dataset data = read_csv(f.input);
  const PrivacyBudget budget{f.epsilon, f.delta};
  RandomStream rng(f.seed);
  json result;
  if (f.decoder == "mean") {
    if (data.dim != 1) throw InvalidInputError("mean decoder needs 1-d data");
    result = decoder_result_to_json(univariate_mean_decoder(
        f.beta, f.gamma, budget, f.sigma_tilde, data.values, rng));
  } else if (f.decoder == "variance") {
    if (data.dim != 1) {
      throw InvalidInputError("variance decoder needs 1-d data");
    }
    result = decoder_result_to_json(
        univariate_variance_decoder(f.beta, f.gamma, budget, data.values, rng));
  } else if (f.decoder == "gaussian") {
    if (data.dim != 1) {
      throw InvalidInputError("gaussian decoder needs 1-d data");
    }
    result = decoder_result_to_json(univariate_gaussian_decoder(
        f.alpha, f.beta, f.gamma, budget, data.values, rng));
  } else if (f.decoder == "identity") {
    const auto detail =
        identity_decode_detail(f.alpha, f.beta, f.gamma, budget, data, rng);
    std::vector<std::vector<double>> means;
    for (const auto& net : detail.refined_means) means.push_back(net);
    const PrivacyBudget spent = detail.ledger.total();
    result = {{"means", nested_or_flat(means)},
              {"scales", json::array()},
              {"failed", detail.failed},
              {"budget_spent",
               {{"epsilon", spent.epsilon}, {"delta", spent.delta}}}};
  } else if (f.decoder == "multivariate") {
    const auto detail =
        multivariate_decode_detail(f.alpha, f.beta, f.gamma, budget, data, rng);
    std::vector<std::vector<double>> means, scales;
    for (const auto& c : detail.coordinates) {
      means.push_back(c.means);
      scales.push_back(c.scales);
    }
    const PrivacyBudget spent = detail.ledger.total();
    result = {{"means", nested_or_flat(means)},
              {"scales", nested_or_flat(scales)},
              {"failed", detail.failed},
              {"budget_spent",
               {{"epsilon", spent.epsilon}, {"delta", spent.delta}}}};
  } else {
    throw InvalidParameterError("unknown decoder: " + f.decoder);
  }
  if (!f.output.empty()) {
    atomic_write_file(f.output, dump(result));
  }
  out << dump(result);
  return kOk;
}

int cmd_learn(const Flags& f, std::ostream& out) {
  if (f.input.empty() || f.output.empty()) {
    throw InvalidInputError("learn requires --input and --output");
  }
  const Dataset data = read_csv(f.input);
  LearnerConfig config;
  config.k = f.k;
  config.alpha = f.alpha;
  config.beta = f.beta;
  config.budget = {f.epsilon, f.delta};
  config.sample_constant = f.constant_c;
  config.candidate_cap = f.candidate_cap;
  config.dedup_radius = f.dedup;
  config.seed = f.seed;
  config.known_sigma = f.sigma;
  config.d = data.dim;
  const MixtureFamily family = family_from_string(f.family);

  const LearnResult result = learn_mixture(config, family, data, f.force);
  atomic_write_file(f.output, dump(model_to_json(Model{result.model})));
  const std::string report_path =
      f.report_path.empty() ? f.output + ".report.json" : f.report_path;
  atomic_write_file(report_path, dump(report_to_json(result.report)));
  out << "wrote model to " << f.output << " and report to " << report_path
      << "\n";
  return kOk;
}

int cmd_eval(const Flags& f, std::ostream& out) {
  if (f.model_path.empty() || f.model_b_path.empty()) {
    throw InvalidInputError("eval requires --model and --model-b");
  }
  const Model a = read_model_file(f.model_path);
  const Model b = read_model_file(f.model_b_path);
  if (dim(a) != dim(b)) {
    throw InvalidInputError("eval models have mismatched dimensions");
  }
  RandomStream rng(f.seed);
  const TvEstimate tv = tv_numeric(a, b, f.effort, rng);
  const char* method = tv.method == TvEstimate::Method::kClosedForm
                           ? "closed-form"
                           : tv.method == TvEstimate::Method::kQuadrature
                                 ? "quadrature"
                                 : "monte-carlo";
  if (f.format == "csv") {
    out << "estimate,std_error,method\n"
        << tv.estimate << "," << tv.std_error << "," << method << "\n";
  } else {
    const json j{{"estimate", tv.estimate},
                 {"std_error", tv.std_error},
                 {"method", method}};
    out << dump(j);
    if (!f.output.empty()) atomic_write_file(f.output, dump(j));
  }
  return kOk;
}

struct TrialOutcome {
  bool success = false;
  double tv = 1.0;
  double seconds = 0.0;
};

Gaussian1D require_gaussian(const Model& m, const char* what) {
  if (const auto* g = std::get_if<Gaussian1D>(&m)) return *g;
  throw InvalidInputError(std::string(what) +
                          " must be a univariate gaussian for this task");
}

int cmd_sweep(const Flags& f, std::ostream& out) {
  if (f.model_path.empty() || f.output.empty()) {
    throw InvalidInputError("sweep requires --model (source) and --output");
  }
  if (f.sweep_values.empty()) {
    throw InvalidInputError("sweep requires --sweep-values");
  }
  if (f.trials < 1) throw InvalidParameterError("trials must be >= 1");

  std::vector<double> values;
  {
    std::stringstream ss(f.sweep_values);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty()) values.push_back(std::stod(cell));
    }
  }
  if (values.empty()) throw InvalidInputError("sweep grid is empty");
  std::sort(values.begin(), values.end());

  const CorruptedSource source = read_source_file(f.model_path);
  const Model target = f.target_path.empty()
                           ? source.target
                           : read_model_file(f.target_path);

  const bool is_learn = f.decoder == "learn";
  Gaussian1D truth{0.0, 1.0};
  if (!is_learn) truth = require_gaussian(target, "--target");

  json summary = json::array();
  std::string csv =
      "n,param_name,param_value,trials,successes,success_rate,mean_tv,"
      "mean_runtime_s\n";

  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    Flags grid = f;
    const double value = values[vi];
    if (f.sweep_param == "n") {
      grid.n = static_cast<std::size_t>(value);
    } else if (f.sweep_param == "epsilon") {
      grid.epsilon = value;
    } else if (f.sweep_param == "gamma") {
      grid.gamma = value;
    } else if (f.sweep_param == "alpha") {
      grid.alpha = value;
    } else {
      throw InvalidParameterError("unknown sweep param: " + f.sweep_param);
    }

    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(f.trials));
    RandomStream sweep_rng(f.seed);
    parallel_for(outcomes.size(), [&](std::size_t t) {
      TrialOutcome& o = outcomes[t];
      const auto start = std::chrono::steady_clock::now();
      try {
        RandomStream rng = sweep_rng.split(vi * 100003 + t);
        RandomStream data_rng = rng.split(0);
        RandomStream algo_rng = rng.split(1);
        const PrivacyBudget budget{grid.epsilon, grid.delta};
        if (f.decoder == "mean") {
          const auto data = sample1d(source, grid.n, data_rng);
          const auto coarse = univariate_mean_decoder(
              grid.beta, grid.gamma, budget, grid.sigma_tilde, data, algo_rng);
          for (double mu : coarse.values) {
            o.success = o.success || std::abs(mu - truth.mu) <= truth.sigma;
            o.tv = std::min(o.tv, tv_univariate_gaussians(
                                       {mu, truth.sigma}, truth));
          }
        } else if (f.decoder == "variance") {
          const auto data = sample1d(source, grid.n, data_rng);
          const auto coarse = univariate_variance_decoder(
              grid.beta, grid.gamma, budget, data, algo_rng);
          for (double s : coarse.values) {
            o.success =
                o.success || (s >= truth.sigma && s < 2.0 * truth.sigma);
            o.tv = std::min(o.tv, tv_univariate_gaussians(
                                       {truth.mu, s}, truth));
          }
        } else if (f.decoder == "gaussian") {
          const auto data = sample1d(source, grid.n, data_rng);
          const auto refined = univariate_gaussian_decoder(
              grid.alpha, grid.beta, grid.gamma, budget, data, algo_rng);
          bool mean_ok = false, scale_ok = false;
          for (double mu : refined.means) {
            mean_ok = mean_ok ||
                      std::abs(mu - truth.mu) <= grid.alpha * truth.sigma;
          }
          for (double s : refined.scales) {
            scale_ok = scale_ok ||
                       std::abs(s - truth.sigma) <= grid.alpha * truth.sigma;
          }
          o.success = mean_ok && scale_ok;
          for (double mu : refined.means) {
            for (double s : refined.scales) {
              o.tv = std::min(o.tv, tv_univariate_gaussians({mu, s}, truth));
            }
          }
        } else if (is_learn) {
          const Dataset data = sample(source, grid.n, data_rng);
          LearnerConfig config;
          config.k = grid.k;
          config.alpha = grid.alpha;
          config.beta = grid.beta;
          config.budget = budget;
          config.sample_constant = grid.constant_c;
          config.candidate_cap = grid.candidate_cap;
          config.dedup_radius = grid.dedup;
          config.seed = rng.split(2).root_seed();
          config.known_sigma = grid.sigma;
          config.d = data.dim;
          const auto result = learn_mixture(
              config, family_from_string(grid.family), data, grid.force);
          RandomStream tv_rng = rng.split(3);
          o.tv = tv_numeric(target, Model{result.model}, 100000, tv_rng)
                     .estimate;
          o.success = o.tv <= grid.alpha;
        } else {
          throw InvalidParameterError("unknown sweep task: " + f.decoder);
        }
      } catch (const std::exception&) {
        o.success = false;  // recorded as failure; the sweep continues
        o.tv = 1.0;
      }
      o.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    });

    std::size_t successes = 0;
    double tv_sum = 0.0, time_sum = 0.0;
    for (const auto& o : outcomes) {
      successes += o.success ? 1 : 0;
      tv_sum += o.tv;
      time_sum += o.seconds;
    }
    const double rate = static_cast<double>(successes) / outcomes.size();
    const double mean_tv = tv_sum / outcomes.size();
    const double mean_s = time_sum / outcomes.size();

    char row[256];
    std::snprintf(row, sizeof row, "%zu,%s,%.17g,%d,%zu,%.17g,%.17g,%.3f\n",
                  grid.n, f.sweep_param.c_str(), value, f.trials, successes,
                  rate, mean_tv, mean_s);
    csv += row;
    summary.push_back({{"n", grid.n},
                       {"param_name", f.sweep_param},
                       {"param_value", value},
                       {"trials", f.trials},
                       {"successes", successes},
                       {"success_rate", rate},
                       {"mean_tv", mean_tv},
                       {"mean_runtime_s", mean_s}});
  }

  atomic_write_file(f.output, csv);
  atomic_write_file(f.output + ".summary.json", dump(summary));
  out << csv;
  return kOk;
}

int exit_code_for(const Error& e) {
  if (dynamic_cast<const ParseError*>(&e)) return kParseError;
  if (dynamic_cast<const InvalidInputError*>(&e)) return kInputError;
  if (dynamic_cast<const InvalidParameterError*>(&e)) return kParameterError;
  if (dynamic_cast<const BudgetViolationError*>(&e)) return kBudgetError;
  if (dynamic_cast<const PlanError*>(&e)) return kPlanError;
  if (dynamic_cast<const DecoderFailureError*>(&e)) return kDecoderFailure;
  if (dynamic_cast<const CandidateOverflowError*>(&e)) return kOverflowError;
  if (dynamic_cast<const ResolutionError*>(&e)) return kResolutionError;
  return kGenericError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  Flags f;

  // Load config defaults before parsing so flags take precedence.
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") {
      std::ifstream in(args[i + 1]);
      if (!in) {
        err << "error: cannot open config " << args[i + 1] << "\n";
        return kInputError;
      }
      try {
        json j;
        in >> j;
        apply_config(j, f);
      } catch (const std::exception& e) {
        err << "error: bad config: " << e.what() << "\n";
        return kParseError;
      }
    }
  }

  CLI::App app{
      "dpmix: differentially private learning of unbounded Gaussian mixtures"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON file of defaults; explicit flags override");

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--epsilon", f.epsilon, "privacy loss epsilon")
        ->capture_default_str();
    cmd->add_option("--delta", f.delta, "privacy failure mass delta")
        ->capture_default_str();
    cmd->add_option("--alpha", f.alpha, "target TV accuracy")
        ->capture_default_str();
    cmd->add_option("--beta", f.beta, "failure probability")
        ->capture_default_str();
    cmd->add_option("--gamma", f.gamma, "declared corruption level")
        ->capture_default_str();
    cmd->add_option("--k", f.k, "mixture components")->capture_default_str();
    cmd->add_option("--d", f.d, "data dimension")->capture_default_str();
    cmd->add_option("--n", f.n, "sample count")->capture_default_str();
    cmd->add_option("--trials", f.trials, "trials per grid point")
        ->capture_default_str();
    cmd->add_option("--seed", f.seed, "master seed")->capture_default_str();
    cmd->add_option("--constant-C", f.constant_c,
                    "sample-size planning constant")
        ->capture_default_str();
    cmd->add_option("--candidate-cap", f.candidate_cap,
                    "max candidate mixtures")
        ->capture_default_str();
    cmd->add_option("--dedup", f.dedup,
                    "candidate dedup radius; 0 keeps the faithful reduction")
        ->capture_default_str();
    cmd->add_option("--sigma", f.sigma, "known sigma (known-sigma family)")
        ->capture_default_str();
    cmd->add_option("--sigma-tilde", f.sigma_tilde,
                    "scale estimate for the mean decoder")
        ->capture_default_str();
    cmd->add_option("--effort", f.effort, "numeric evaluation effort")
        ->capture_default_str();
    cmd->add_option("--input", f.input, "input dataset (CSV)");
    cmd->add_option("--output", f.output, "output path");
    cmd->add_option("--format", f.format, "output format: json|csv")
        ->capture_default_str();
    cmd->add_flag("--force", f.force, "run below the sample-size plan");
    cmd->add_option("--config", config_path,
                    "JSON file of defaults; explicit flags override");
  };

  CLI::App* gen = app.add_subcommand("gen", "sample a synthetic dataset");
  add_common(gen);
  gen->add_option("--model", f.model_path, "model/source JSON")->required();

  CLI::App* decode = app.add_subcommand("decode", "run a list decoder");
  add_common(decode);
  decode->add_option("--decoder", f.decoder,
                     "mean|variance|gaussian|identity|multivariate")
      ->capture_default_str();

  CLI::App* learn = app.add_subcommand("learn", "learn a mixture");
  add_common(learn);
  learn->add_option("--family", f.family,
                    "univariate|axis-aligned|identity-cov|known-sigma")
      ->capture_default_str();
  learn->add_option("--report", f.report_path, "run-report JSON path");

  CLI::App* eval = app.add_subcommand("eval", "TV distance between models");
  add_common(eval);
  eval->add_option("--model", f.model_path, "first model JSON")->required();
  eval->add_option("--model-b", f.model_b_path, "second model JSON")
      ->required();

  CLI::App* sweep = app.add_subcommand(
      "sweep", "trial grids of decoder/learner runs");
  add_common(sweep);
  sweep->add_option("--model", f.model_path, "data-generating source JSON")
      ->required();
  sweep->add_option("--target", f.target_path,
                    "reference model JSON (default: source target)");
  sweep->add_option("--task", f.decoder, "mean|variance|gaussian|learn")
      ->capture_default_str();
  sweep->add_option("--family", f.family, "family for the learn task")
      ->capture_default_str();
  sweep->add_option("--sweep-param", f.sweep_param, "n|epsilon|gamma|alpha")
      ->capture_default_str();
  sweep->add_option("--sweep-values", f.sweep_values,
                    "comma-separated grid values")
      ->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << "\n";
    return kParameterError;
  }

  try {
    if (gen->parsed()) return cmd_gen(f, out);
    if (decode->parsed()) return cmd_decode(f, out);
    if (learn->parsed()) return cmd_learn(f, out);
    if (eval->parsed()) return cmd_eval(f, out);
    if (sweep->parsed()) return cmd_sweep(f, out);
    err << "error: no subcommand\n";
    return kParameterError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kGenericError;
  }
}

}  // namespace dpmix::cli

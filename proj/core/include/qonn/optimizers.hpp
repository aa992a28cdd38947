// Copyright 2026 The QONN Authors
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
#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace qonn {

/// Deterministic objective to minimise. Must be safe to call concurrently
/// when an optimizer is given more than one job.
using Objective = std::function<double(std::span<const double>)>;

struct LocalSearchConfig {
  std::size_t max_evaluations = 100000;
  double initial_radius = 0.5;
  /// Final trust-region resolution; the run stops once it is reached.
  double final_radius = 1e-7;
  /// Stop when the best value improved by less than this between two
  /// successive radius reductions. 0 disables the test.
  double cost_tolerance = 0.0;
  /// Stop as soon as a value <= target is found.
  double target = -std::numeric_limits<double>::infinity();
  /// Optional box; empty means unbounded. Sizes must match x0 otherwise.
  std::vector<double> lower;
  std::vector<double> upper;

  void validate() const;
};

struct TracePoint {
  std::size_t evaluation = 0;
  double best = 0.0;
  double wall_time_s = 0.0;
};

struct LocalSearchResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
  bool converged = false;
  /// "target", "radius", "cost_tolerance" or "budget".
  std::string stop_reason;
  std::size_t nonfinite_evaluations = 0;
  /// One point per improvement of the best value.
  std::vector<TracePoint> trace;
};

/// Trust-region minimisation with quadratic models built from 2d + 1
/// interpolation points, updated by minimum-Frobenius-norm changes of the
/// Hessian. Non-finite objective values are treated as +inf.
LocalSearchResult minimize_local(const Objective& f, std::span<const double> x0,
                                 const LocalSearchConfig& config);

struct MultiStartConfig {
  std::size_t starts = 10;
  LocalSearchConfig local;
  /// A candidate start closer than this (Euclidean) to an earlier start is
  /// redrawn, at most `max_redraws` times.
  double rejection_radius = 0.1;
  std::size_t max_redraws = 100;
  /// Starts are drawn uniformly from [sample_lower, sample_upper]^d.
  double sample_lower = 0.0;
  double sample_upper = 6.283185307179586;
  int jobs = 1;

  void validate() const;
};

struct StartRecord {
  std::size_t index = 0;
  std::vector<double> x0;
  LocalSearchResult result;
};

struct MultiStartResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  std::size_t best_start = 0;
  std::size_t evaluations = 0;
  std::vector<StartRecord> starts;
};

/// Seeded uniform restarts of `minimize_local`; start i uses substream
/// "start"[i] of `seed`. Results do not depend on `jobs`.
MultiStartResult minimize_multistart(const Objective& f, std::size_t dimension,
                                     const MultiStartConfig& config, std::uint64_t seed);

/// Stochastic fitness to maximise; the seed selects the random episode.
using StochasticFitness = std::function<double(std::span<const double>, std::uint64_t seed)>;
/// Fitness of one parameter vector for each of several run seeds, in order.
using BatchFitness = std::function<std::vector<double>(std::span<const double>,
                                                       std::span<const std::uint64_t> seeds)>;

struct EsConfig {
  /// Perturbations per generation; must be even.
  std::size_t population = 100;
  double sigma = 0.1;
  double learning_rate = 0.05;
  std::size_t generations = 200;
  /// Fitness of a parameter vector is the mean over this many seeded runs.
  std::size_t fitness_runs = 80;
  int jobs = 1;

  void validate() const;
};

struct EsGeneration {
  std::size_t generation = 0;
  double mean_fitness = 0.0;
  double max_fitness = 0.0;
  double center_fitness = 0.0;
  double wall_time_s = 0.0;
};

struct EsResult {
  std::vector<double> x;
  std::vector<EsGeneration> trace;
  /// Parameters after each generation.
  std::vector<std::vector<double>> trajectory;
};

/// Evolution strategy with mirrored Gaussian perturbations and centred-rank
/// fitness shaping: x += lr / (P sigma) sum_p w_p eps_p. In generation g all
/// candidates share the run seeds "fitness"[g * R + r], r < R. Non-finite
/// fitness values are replaced by the lowest finite value seen so far.
EsResult maximize_es(const StochasticFitness& fitness, std::vector<double> x0,
                     const EsConfig& config, std::uint64_t seed);
EsResult maximize_es(const BatchFitness& fitness, std::vector<double> x0,
                     const EsConfig& config, std::uint64_t seed);

/// Centred ranks in [-0.5, 0.5] with tied values sharing their average rank.
std::vector<double> rank_shape_fitness(std::span<const double> raw);

nlohmann::json to_json(const LocalSearchConfig& c);
LocalSearchConfig local_search_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MultiStartConfig& c);
MultiStartConfig multistart_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EsConfig& c);
EsConfig es_config_from_json(const nlohmann::json& j);

namespace detail {

/// KKT matrix [[A, P^T], [P, 0]] of the minimum-Frobenius-norm interpolation
/// problem, A_ij = (y_i . y_j)^2 / 2, P = [1 ... 1; Y^T]. Rows of `points`
/// are displacements from the base point.
Eigen::MatrixXd kkt_matrix(const Eigen::MatrixXd& points);
/// Inverse of `kkt_matrix(points)`, computed on rescaled points.
Eigen::MatrixXd inverse_kkt(const Eigen::MatrixXd& points);

struct ReplacementTerms {
  Eigen::VectorXd v;  // inverse * w(y_new)
  double beta = 0.0;
};

ReplacementTerms replacement_terms(const Eigen::MatrixXd& inverse, const Eigen::MatrixXd& points,
                                   const Eigen::VectorXd& y_new);
/// alpha * beta + tau^2 for replacing point t.
double replacement_denominator(const Eigen::MatrixXd& inverse, const ReplacementTerms& terms,
                               Eigen::Index t);
/// Rank-two update of the inverse KKT matrix when point t becomes y_new.
void replace_point(Eigen::MatrixXd& inverse, const ReplacementTerms& terms, Eigen::Index t);

/// Truncated conjugate gradient for min g.s + s.Hs/2 subject to |s| <= delta
/// and lo <= s <= hi. `hess` returns H v.
Eigen::VectorXd trust_region_step(const Eigen::VectorXd& g,
                                  const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& hess,
                                  double delta, const Eigen::VectorXd& lo,
                                  const Eigen::VectorXd& hi);

}  // namespace detail
}  // namespace qonn

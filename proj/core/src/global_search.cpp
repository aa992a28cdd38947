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
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "qonn/optimizers.hpp"
#include "qonn/parallel.hpp"
#include "qonn/rng.hpp"

namespace qonn {

void MultiStartConfig::validate() const {
  if (starts < 1) throw std::invalid_argument("MultiStartConfig: starts must be >= 1");
  if (!(rejection_radius >= 0.0)) {
    throw std::invalid_argument("MultiStartConfig: rejection_radius must be >= 0");
  }
  if (!(sample_upper > sample_lower)) {
    throw std::invalid_argument("MultiStartConfig: empty sampling box");
  }
  local.validate();
}

MultiStartResult minimize_multistart(const Objective& f, std::size_t dimension,
                                     const MultiStartConfig& config, std::uint64_t seed) {
  config.validate();
  if (dimension < 1) throw std::invalid_argument("minimize_multistart: dimension must be >= 1");
  std::vector<std::vector<double>> x0s;
  x0s.reserve(config.starts);
  std::uniform_real_distribution<double> box(config.sample_lower, config.sample_upper);
  for (std::size_t i = 0; i < config.starts; ++i) {
    Rng rng = make_rng(seed, "start", i);
    std::vector<double> x(dimension);
    for (std::size_t attempt = 0;; ++attempt) {
      for (auto& v : x) v = box(rng);
      const bool clash = std::any_of(x0s.begin(), x0s.end(), [&](const std::vector<double>& prev) {
        double dsq = 0.0;
        for (std::size_t k = 0; k < dimension; ++k) dsq += (prev[k] - x[k]) * (prev[k] - x[k]);
        return dsq < config.rejection_radius * config.rejection_radius;
      });
      if (!clash || attempt >= config.max_redraws) break;
    }
    x0s.push_back(x);
  }

  MultiStartResult out;
  out.starts.resize(config.starts);
  parallel_for(config.starts, config.jobs, [&](std::size_t i) {
    out.starts[i].index = i;
    out.starts[i].x0 = x0s[i];
    out.starts[i].result = minimize_local(f, x0s[i], config.local);
  });
  for (const auto& rec : out.starts) {
    out.evaluations += rec.result.evaluations;
    if (out.x.empty() || rec.result.value < out.value) {
      out.value = rec.result.value;
      out.x = rec.result.x;
      out.best_start = rec.index;
    }
  }
  return out;
}

void EsConfig::validate() const {
  if (population < 2 || population % 2 != 0) {
    throw std::invalid_argument("EsConfig: population must be even and >= 2");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("EsConfig: sigma must be > 0");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("EsConfig: learning_rate must be >= 0");
  if (fitness_runs < 1) throw std::invalid_argument("EsConfig: fitness_runs must be >= 1");
}

std::vector<double> rank_shape_fitness(std::span<const double> raw) {
  const std::size_t n = raw.size();
  if (n < 2) throw std::invalid_argument("rank_shape_fitness: need at least two values");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
  std::vector<double> shaped(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && raw[order[j + 1]] == raw[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) {
      shaped[order[k]] = rank / static_cast<double>(n - 1) - 0.5;
    }
    i = j + 1;
  }
  return shaped;
}

EsResult maximize_es(const StochasticFitness& fitness, std::vector<double> x0,
                     const EsConfig& config, std::uint64_t seed) {
  const BatchFitness batch = [&fitness](std::span<const double> x,
                                        std::span<const std::uint64_t> seeds) {
    std::vector<double> out;
    out.reserve(seeds.size());
    for (std::uint64_t s : seeds) out.push_back(fitness(x, s));
    return out;
  };
  return maximize_es(batch, std::move(x0), config, seed);
}

EsResult maximize_es(const BatchFitness& fitness, std::vector<double> x0,
                     const EsConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t d = x0.size();
  if (d < 1) throw std::invalid_argument("maximize_es: dimension must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t pairs = config.population / 2;
  const std::size_t runs = config.fitness_runs;
  double lowest_seen = std::numeric_limits<double>::infinity();

  EsResult out;
  out.x = std::move(x0);
  std::normal_distribution<double> gauss;
  for (std::size_t gen = 0; gen < config.generations; ++gen) {
    Rng noise_rng = make_rng(seed, "es-noise", gen);
    std::vector<std::vector<double>> eps(pairs, std::vector<double>(d));
    for (auto& e : eps) {
      for (auto& v : e) v = gauss(noise_rng);
    }
    // Candidate c < population is x + sign * sigma * eps[c / 2]; the last
    // slot is the unperturbed centre.
    std::vector<std::uint64_t> run_seeds(runs);
    for (std::size_t r = 0; r < runs; ++r) {
      run_seeds[r] = derive_seed(seed, "fitness", gen * runs + r);
    }
    std::vector<double> raw(config.population + 1);
    parallel_for(config.population + 1, config.jobs, [&](std::size_t c) {
      std::vector<double> x = out.x;
      if (c < config.population) {
        const double sign = c % 2 == 0 ? 1.0 : -1.0;
        for (std::size_t k = 0; k < d; ++k) x[k] += sign * config.sigma * eps[c / 2][k];
      }
      const std::vector<double> values = fitness(x, run_seeds);
      if (values.size() != runs) {
        throw std::logic_error("maximize_es: fitness returned the wrong number of runs");
      }
      raw[c] = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(runs);
    });
    for (double v : raw) {
      if (std::isfinite(v)) lowest_seen = std::min(lowest_seen, v);
    }
    for (double& v : raw) {
      if (!std::isfinite(v)) v = std::isfinite(lowest_seen) ? lowest_seen : 0.0;
    }
    const std::span<const double> population(raw.data(), config.population);
    const std::vector<double> weights = rank_shape_fitness(population);
    std::vector<double> direction(d, 0.0);
    for (std::size_t c = 0; c < config.population; ++c) {
      const double sign = c % 2 == 0 ? 1.0 : -1.0;
      for (std::size_t k = 0; k < d; ++k) direction[k] += weights[c] * sign * eps[c / 2][k];
    }
    const double scale = config.learning_rate /
                         (static_cast<double>(config.population) * config.sigma);
    for (std::size_t k = 0; k < d; ++k) out.x[k] += scale * direction[k];

    EsGeneration g;
    g.generation = gen;
    g.mean_fitness =
        std::accumulate(population.begin(), population.end(), 0.0) / population.size();
    g.max_fitness = *std::max_element(population.begin(), population.end());
    g.center_fitness = raw.back();
    g.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.trace.push_back(g);
    out.trajectory.push_back(out.x);
  }
  return out;
}

nlohmann::json to_json(const LocalSearchConfig& c) {
  nlohmann::json j = {{"max_evaluations", c.max_evaluations},
                      {"initial_radius", c.initial_radius},
                      {"final_radius", c.final_radius},
                      {"cost_tolerance", c.cost_tolerance}};
  j["target"] = std::isfinite(c.target) ? nlohmann::json(c.target) : nlohmann::json(nullptr);
  if (!c.lower.empty()) {
    j["lower"] = c.lower;
    j["upper"] = c.upper;
  }
  return j;
}

LocalSearchConfig local_search_config_from_json(const nlohmann::json& j) {
  LocalSearchConfig c;
  c.max_evaluations = j.at("max_evaluations").get<std::size_t>();
  c.initial_radius = j.at("initial_radius").get<double>();
  c.final_radius = j.at("final_radius").get<double>();
  c.cost_tolerance = j.at("cost_tolerance").get<double>();
  if (j.contains("target") && !j.at("target").is_null()) c.target = j.at("target").get<double>();
  if (j.contains("lower")) {
    c.lower = j.at("lower").get<std::vector<double>>();
    c.upper = j.at("upper").get<std::vector<double>>();
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const MultiStartConfig& c) {
  return {{"starts", c.starts},
          {"local", to_json(c.local)},
          {"rejection_radius", c.rejection_radius},
          {"max_redraws", c.max_redraws},
          {"sample_lower", c.sample_lower},
          {"sample_upper", c.sample_upper}};
}

MultiStartConfig multistart_config_from_json(const nlohmann::json& j) {
  MultiStartConfig c;
  c.starts = j.at("starts").get<std::size_t>();
  c.local = local_search_config_from_json(j.at("local"));
  c.rejection_radius = j.at("rejection_radius").get<double>();
  c.max_redraws = j.at("max_redraws").get<std::size_t>();
  c.sample_lower = j.at("sample_lower").get<double>();
  c.sample_upper = j.at("sample_upper").get<double>();
  c.validate();
  return c;
}

nlohmann::json to_json(const EsConfig& c) {
  return {{"population", c.population},
          {"sigma", c.sigma},
          {"learning_rate", c.learning_rate},
          {"generations", c.generations},
          {"fitness_runs", c.fitness_runs}};
}

EsConfig es_config_from_json(const nlohmann::json& j) {
  EsConfig c;
  c.population = j.at("population").get<std::size_t>();
  c.sigma = j.at("sigma").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.generations = j.at("generations").get<std::size_t>();
  c.fitness_runs = j.at("fitness_runs").get<std::size_t>();
  c.validate();
  return c;
}

}  // namespace qonn

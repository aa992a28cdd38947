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

#include <benchmark/benchmark.h>

#include <random>

#include "qonn/interferometer.hpp"
#include "qonn/model.hpp"
#include "qonn/optimizers.hpp"
#include "qonn/permanent.hpp"
#include "qonn/tasks.hpp"

namespace {

using namespace qonn;

ComplexMatrix random_matrix(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  ComplexMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  }
  return m;
}

void BM_PermanentRyser(benchmark::State& state) {
  const ComplexMatrix m = random_matrix(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(permanent_ryser(m));
}
BENCHMARK(BM_PermanentRyser)->DenseRange(2, 12, 2);

void BM_PermanentNaive(benchmark::State& state) {
  const ComplexMatrix m = random_matrix(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(permanent_naive(m));
}
BENCHMARK(BM_PermanentNaive)->DenseRange(2, 8, 2);

void BM_LiftToFock(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const int m = static_cast<int>(state.range(1));
  const FockBasisPtr basis = enumerate_basis(n, m);
  const ComplexMatrix u = mesh_to_unitary(random_mesh(m, 3));
  for (auto _ : state) benchmark::DoNotOptimize(lift_to_fock(u, basis).entries.data());
  state.counters["dim"] = static_cast<double>(basis->size());
}
BENCHMARK(BM_LiftToFock)->Args({2, 4})->Args({3, 6})->Args({4, 8});

// One cost evaluation, the inner loop of every training run.
void BM_CnotCost(benchmark::State& state) {
  QonnModel model(2, 4, static_cast<int>(state.range(0)));
  model.set_propagation(state.range(1) ? Propagation::kFactorized : Propagation::kDense);
  const TrainingSet set = benchmark_training_set("cnot");
  std::vector<double> theta(model.parameter_count(), 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(cost(model, theta, set));
}
BENCHMARK(BM_CnotCost)->ArgsProduct({{2, 7}, {0, 1}})->ArgNames({"layers", "factorized"});

void BM_AutoencoderCost(benchmark::State& state) {
  const QonnModel model = state.range(0) ? unstructured_autoencoder_model(kPi)
                                         : structured_autoencoder_model(kPi);
  const AutoencoderTask task = AutoencoderTask::from_coefficients(
      {{0.7, Complex(-0.1, 0.0), Complex(0.99498743710662, 0.0)},
       {1.5, Complex(-0.3554, 0.0), Complex(0.93471, 0.0)}});
  std::vector<double> theta(model.parameter_count(), 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(autoencoder_cost(model, theta, task.states, task.reference_qubits));
  }
}
BENCHMARK(BM_AutoencoderCost)->Arg(0)->Arg(1)->ArgName("unstructured");

void BM_LocalSearchSphere(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const Objective f = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  };
  LocalSearchConfig config;
  config.max_evaluations = 2000;
  const std::vector<double> x0(d, 0.7);
  for (auto _ : state) benchmark::DoNotOptimize(minimize_local(f, x0, config).value);
}
BENCHMARK(BM_LocalSearchSphere)->Arg(12)->Arg(84)->Unit(benchmark::kMillisecond);

void BM_CartpoleEpisode(benchmark::State& state) {
  QonnModel model(4, 8, 6);
  model.set_propagation(Propagation::kFactorized);
  std::vector<double> theta(model.parameter_count());
  std::mt19937_64 init(5);
  for (auto& v : theta) v = uniform_phase(init);
  const QonnPolicy policy(model, theta);
  const CartPoleConfig env;
  Rng rng(9);
  std::int64_t steps = 0;
  for (auto _ : state) steps += episode_fitness(policy, env, rng);
  state.counters["steps/s"] = benchmark::Counter(static_cast<double>(steps), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_CartpoleEpisode);

void BM_PolicyBuild(benchmark::State& state) {
  QonnModel model(4, 8, 6);
  model.set_propagation(Propagation::kFactorized);
  const std::vector<double> theta(model.parameter_count(), 0.4);
  for (auto _ : state) {
    QonnPolicy policy(model, theta);
    benchmark::DoNotOptimize(&policy);
  }
}
BENCHMARK(BM_PolicyBuild)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

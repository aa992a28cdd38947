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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any selected criterion fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qonn/fock.hpp"
#include "qonn/hamiltonians.hpp"
#include "qonn/interferometer.hpp"
#include "qonn/model.hpp"
#include "qonn/optimizers.hpp"
#include "qonn/permanent.hpp"
#include "qonn/runner.hpp"
#include "qonn/tasks.hpp"

namespace {

using namespace qonn;
using nlohmann::json;
namespace fs = std::filesystem;

// Gates.
constexpr double kPermanentRelTol = 1e-10;
constexpr double kPermanentSeconds = 10.0;
constexpr double kLiftUnitarityTol = 1e-9;
constexpr double kLiftSeconds = 60.0;
constexpr double kHomCoincidenceTol = 1e-12;
constexpr double kCnotSuccessFraction = 0.80;
constexpr double kIsingTestError = 0.05;
constexpr double kIsingProbeTol = 0.05;
constexpr double kBhLinearLow = 0.25;
constexpr double kBhLinearHigh = 0.60;
constexpr double kBhDeepError = 0.01;
constexpr double kBhSmokeError = 0.03;
constexpr double kAutoencoderFloor = 0.85;
constexpr double kRlImprovement = 3.0;
constexpr double kPropertySeconds = 120.0;
constexpr double kPropertyTol = 1e-10;

struct Options {
  bool smoke = false;
  int jobs = 1;
  fs::path work;
  fs::path configs = QONN_CONFIG_DIR;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ComplexMatrix gaussian_matrix(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  }
  return m;
}

ComplexVector gaussian_unit_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  return v / v.norm();
}

ExperimentConfig shipped(const Options& o, const std::string& name, const std::string& run) {
  ExperimentConfig c = load_experiment_config(o.configs / name);
  c.output_dir = o.work / run;
  c.jobs = o.jobs;
  c.sweep.reset();
  return c;
}

RunRecord run_checked(const ExperimentConfig& c) {
  RunRecord r = run_experiment(c);
  if (!r.ok) throw std::runtime_error("run failed: " + r.diagnostic);
  return r;
}

double metric(const RunRecord& r, const char* name) { return r.metrics.at(name).get<double>(); }

// 1 -------------------------------------------------------------------------
Outcome permanent_oracle(const Options&) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int k = 0; k < 500; ++k) {
    const ComplexMatrix m = gaussian_matrix(1 + k % 8, rng);
    const Complex naive = permanent_naive(m);
    const Complex ryser = permanent_ryser(m);
    worst = std::max(worst, std::abs(ryser - naive) / std::abs(naive));
  }
  const double t = seconds_since(t0);
  return {worst < kPermanentRelTol && t < kPermanentSeconds,
          fmt("max relative deviation %.2e over 500 matrices, %.2f s", worst, t)};
}

// 2 -------------------------------------------------------------------------
Outcome lift_unitarity(const Options&) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const auto [n, m] : {std::pair{2, 4}, std::pair{3, 6}, std::pair{2, 8}}) {
    const FockBasisPtr basis = enumerate_basis(n, m);
    for (std::uint64_t s = 0; s < 50; ++s) {
      const ComplexMatrix u = mesh_to_unitary(random_mesh(m, derive_seed(7, "mesh", s)));
      worst = std::max(worst, unitarity_deviation(lift_to_fock(u, basis).entries));
    }
  }
  const double t = seconds_since(t0);
  return {worst < kLiftUnitarityTol && t < kLiftSeconds,
          fmt("max ||T^dagger T - I||_F %.2e over 150 meshes, %.2f s", worst, t)};
}

// 3 -------------------------------------------------------------------------
Outcome hong_ou_mandel(const Options&) {
  const FockBasisPtr basis = enumerate_basis(2, 2);
  const double r = 1.0 / std::sqrt(2.0);
  ComplexMatrix splitter(2, 2);
  splitter << r, Complex(0, r), Complex(0, r), r;
  const TransferMatrix t = lift_to_fock(splitter, basis);
  const auto in = static_cast<Eigen::Index>(basis->index_of({1, 1}));
  const double p = std::norm(t.entries(in, in));
  const double bunched = std::norm(t.entries(static_cast<Eigen::Index>(basis->index_of({2, 0})), in));
  return {p < kHomCoincidenceTol, fmt("P(1,1) = %.2e, P(2,0) = %.6f", p, bunched)};
}

// 4 -------------------------------------------------------------------------
Outcome cnot_depth(const Options& o) {
  ExperimentConfig deep = shipped(o, "benchmark_cnot.json", "c4-cnot-n7");
  deep.benchmark.name = "cnot";
  deep.model.layers = 7;
  deep.search.starts = 20;
  ExperimentConfig shallow = deep;
  shallow.model.layers = 2;
  shallow.output_dir = o.work / "c4-cnot-n2";
  const double f7 = metric(run_checked(deep), "success_fraction");
  const double f2 = metric(run_checked(shallow), "success_fraction");
  return {f7 >= kCnotSuccessFraction && f2 < f7,
          fmt("success N=7 %.0f%%, N=2 %.0f%% (20 restarts, %zu evaluations each)", 100 * f7,
              100 * f2, deep.search.local.max_evaluations)};
}

// 5 -------------------------------------------------------------------------
Outcome ising_generalization(const Options& o) {
  ExperimentConfig c = shipped(o, "hamsim_ising.json", "c5-ising");
  c.ising = IsingSpec::chain(2, 1.0, 1.0, 1.0);
  c.model.layers = 3;
  c.hamsim = {20, 50};
  c.search.starts = 5;
  const RunRecord r = run_checked(c);
  const double test = metric(r, "test_error");
  const double probe = metric(r, "probe_max_abs_error");
  return {test < kIsingTestError && probe <= kIsingProbeTol,
          fmt("test error %.4f (gate %.2f), |up,up> max probability error %.4f (gate %.2f), "
              "train cost %.4f",
              test, kIsingTestError, probe, kIsingProbeTol, metric(r, "train_cost"))};
}

// 6 -------------------------------------------------------------------------
Outcome bose_hubbard_depth(const Options& o) {
  ExperimentConfig c = shipped(o, "hamsim_bh.json", "c6-bh");
  c.bose_hubbard.photons = 2;
  c.bose_hubbard.sites = 4;
  c.bose_hubbard.t_hop = 1.0;
  c.bose_hubbard.U = 20.0;
  c.bose_hubbard.t = 1.0;
  c.hamsim = {20, 50};
  const std::size_t starts = o.smoke ? 5 : 20;
  c.search.starts = starts;

  ExperimentConfig deep = c;
  deep.model.layers = 7;
  deep.output_dir = o.work / "c6-bh-n7";
  const double e7 = metric(run_checked(deep), "test_error");
  if (o.smoke) {
    return {e7 < kBhSmokeError, fmt("smoke: N=7 best-of-%zu test error %.4f (gate %.2f)", starts, e7,
                                    kBhSmokeError)};
  }
  ExperimentConfig linear = c;
  linear.model.layers = 1;
  linear.output_dir = o.work / "c6-bh-n1";
  const double e1 = metric(run_checked(linear), "test_error");
  return {e1 >= kBhLinearLow && e1 <= kBhLinearHigh && e7 < kBhDeepError,
          fmt("best-of-%zu test error N=1 %.4f (gate [%.2f, %.2f]), N=7 %.4f (gate %.2f)", starts,
              e1, kBhLinearLow, kBhLinearHigh, e7, kBhDeepError)};
}

// 7 -------------------------------------------------------------------------
Outcome autoencoder_ordering(const Options& o) {
  ExperimentConfig s = shipped(o, "autoencoder_global_structured.json", "c7-structured");
  ExperimentConfig u = shipped(o, "autoencoder_global_unstructured.json", "c7-unstructured");
  s.search.starts = u.search.starts = 5;
  const double fs_ = metric(run_checked(s), "fidelity");
  const double fu = metric(run_checked(u), "fidelity");
  return {fs_ >= fu && fs_ >= kAutoencoderFloor,
          fmt("best-of-5 reference fidelity structured %.4f, unstructured %.4f (floor %.2f)", fs_,
              fu, kAutoencoderFloor)};
}

// 8 -------------------------------------------------------------------------
std::vector<double> trace_column(const fs::path& csv, const std::string& column) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  std::stringstream hs(line);
  for (std::string h; std::getline(hs, h, ',');) header.push_back(h);
  const auto at = std::find(header.begin(), header.end(), column) - header.begin();
  std::vector<double> out;
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::string cell;
    for (std::ptrdiff_t k = 0; k <= at; ++k) std::getline(ls, cell, ',');
    out.push_back(std::stod(cell));
  }
  return out;
}

Outcome reinforcement_learning(const Options& o) {
  ExperimentConfig c = shipped(o, o.smoke ? "cartpole_smoke.json" : "cartpole.json", "c8-cartpole");
  c.model.layers = 6;
  c.es.population = 100;
  c.es.fitness_runs = 80;
  c.es.generations = o.smoke ? 50 : 200;
  c.cartpole.window = 10;
  const RunRecord r = run_checked(c);
  const double random_median = metric(r, "random_policy_median");
  if (!o.smoke) {
    const double last = metric(r, "final_window_median");
    return {last >= kRlImprovement * random_median,
            fmt("median fitness over last 10 of 200 generations %.1f, random policy %.1f "
                "(ratio %.2f, gate %.1f)",
                last, random_median, last / random_median, kRlImprovement)};
  }
  const std::vector<double> mean = trace_column(c.output_dir / "trace.csv", "mean_fitness");
  std::vector<double> windows;
  for (std::size_t g = 0; g + 10 <= mean.size(); g += 10) {
    windows.push_back(median({mean.begin() + static_cast<std::ptrdiff_t>(g),
                              mean.begin() + static_cast<std::ptrdiff_t>(g + 10)}));
  }
  bool increasing = windows.size() == 5;
  std::string listing;
  for (std::size_t k = 0; k < windows.size(); ++k) {
    if (k > 0 && !(windows[k] > windows[k - 1])) increasing = false;
    listing += fmt("%s%.1f", k ? ", " : "", windows[k]);
  }
  return {increasing, fmt("smoke: 10-generation medians of mean fitness [%s], random policy %.1f",
                          listing.c_str(), random_median)};
}

// 9 -------------------------------------------------------------------------
Outcome determinism(const Options& o) {
  std::vector<ExperimentConfig> configs;
  {
    ExperimentConfig c = shipped(o, "benchmark_cnot.json", "c9-benchmark");
    c.search.starts = 3;
    c.search.local.max_evaluations = 2000;
    configs.push_back(c);
  }
  for (const char* name : {"hamsim_ising.json", "hamsim_bh.json"}) {
    ExperimentConfig c = shipped(o, name, std::string("c9-") + name);
    c.search.starts = 2;
    c.search.local.max_evaluations = 1500;
    configs.push_back(c);
  }
  for (const char* name : {"autoencoder_global_structured.json", "autoencoder_local_structured.json"}) {
    ExperimentConfig c = shipped(o, name, std::string("c9-") + name);
    c.search.starts = 2;
    c.search.local.max_evaluations = 400;
    configs.push_back(c);
  }
  {
    ExperimentConfig c = shipped(o, "cartpole.json", "c9-cartpole");
    c.es.population = 6;
    c.es.fitness_runs = 4;
    c.es.generations = 4;
    c.cartpole.baseline_episodes = 50;
    configs.push_back(c);
  }
  std::string mismatches;
  for (ExperimentConfig c : configs) {
    const fs::path base = c.output_dir;
    std::vector<json> metrics;
    std::vector<std::string> checkpoints;
    for (int rep = 0; rep < 2; ++rep) {
      c.output_dir = base / ("rep" + std::to_string(rep));
      c.jobs = rep == 0 ? 1 : std::max(2, o.jobs);
      const RunRecord r = run_checked(c);
      metrics.push_back(r.metrics);
      std::ifstream in(c.output_dir / "checkpoint.json");
      checkpoints.emplace_back(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    if (metrics[0] != metrics[1] || checkpoints[0] != checkpoints[1]) {
      mismatches += " " + to_string(c.experiment);
    }
  }
  return {mismatches.empty(),
          mismatches.empty()
              ? fmt("%zu experiments rerun with 1 and %d jobs: metrics and checkpoints identical",
                    configs.size(), std::max(2, o.jobs))
              : "differences in:" + mismatches};
}

// 10 ------------------------------------------------------------------------
Outcome properties(const Options&) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> phase(0.0, 2 * kPi);
  std::vector<std::string> failed;
  auto check = [&](bool ok, const std::string& name) {
    if (!ok && std::find(failed.begin(), failed.end(), name) == failed.end()) failed.push_back(name);
  };
  int checks = 0;

  // Network: norm preservation, dense/factorized agreement, cost bounds.
  for (const auto [n, m, layers] : {std::tuple{2, 4, 3}, std::tuple{3, 6, 2}, std::tuple{2, 8, 1}}) {
    QonnModel model(n, m, layers, phase(rng));
    for (int trial = 0; trial < 5; ++trial, ++checks) {
      std::vector<double> theta(model.parameter_count());
      for (auto& v : theta) v = phase(rng);
      model.set_theta(theta);
      const FockBasisPtr basis = model.basis_ptr();
      const QuantumState in(basis, gaussian_unit_vector(static_cast<Eigen::Index>(basis->size()), rng));
      model.set_propagation(Propagation::kDense);
      const QuantumState dense = forward(model, in);
      model.set_propagation(Propagation::kFactorized);
      const QuantumState fact = forward(model, in);
      check(std::abs(dense.amplitudes().norm() - 1.0) < kPropertyTol, "norm preservation");
      check((dense.amplitudes() - fact.amplitudes()).norm() < 1e-9, "propagation agreement");
      std::vector<TrainingSet::Pair> pairs;
      for (int k = 0; k < 4; ++k) {
        pairs.emplace_back(
            QuantumState(basis, gaussian_unit_vector(static_cast<Eigen::Index>(basis->size()), rng)),
            QuantumState(basis, gaussian_unit_vector(static_cast<Eigen::Index>(basis->size()), rng)));
      }
      const double c = cost(model, theta, TrainingSet(std::move(pairs)));
      check(c >= 0.0 && c <= 1.0, "cost bounds");
    }
  }

  // Kerr layer: phi followed by -phi is the identity, and it preserves norm.
  for (int trial = 0; trial < 10; ++trial, ++checks) {
    const FockBasisPtr basis = enumerate_basis(3, 4);
    const QuantumState s(basis, gaussian_unit_vector(static_cast<Eigen::Index>(basis->size()), rng));
    const double phi = phase(rng);
    const QuantumState once = apply_kerr(s, phi);
    check(std::abs(once.amplitudes().norm() - 1.0) < kPropertyTol, "Kerr norm");
    check((apply_kerr(once, -phi).amplitudes() - s.amplitudes()).norm() < kPropertyTol, "Kerr inverse");
  }

  // Lift: homomorphism and unitarity on random meshes.
  for (int trial = 0; trial < 10; ++trial, ++checks) {
    const FockBasisPtr basis = enumerate_basis(3, 5);
    const ComplexMatrix u = mesh_to_unitary(random_mesh(5, rng()));
    const ComplexMatrix v = mesh_to_unitary(random_mesh(5, rng()));
    const ComplexMatrix tuv = lift_to_fock(u * v, basis).entries;
    const ComplexMatrix tu_tv = lift_to_fock(u, basis).entries * lift_to_fock(v, basis).entries;
    check((tuv - tu_tv).norm() < 1e-9, "lift homomorphism");
  }

  // Hamiltonians: composition of evolutions and energy conservation.
  BoseHubbardSpec bh;
  bh.U = 3.0;
  const FockBasisPtr bh_basis = enumerate_basis(bh.photons, bh.sites);
  for (const ComplexMatrix& h :
       {ising_matrix(IsingSpec::chain(3, 1.0, -0.7, 1.0)), bose_hubbard_matrix(bh, *bh_basis)}) {
    for (int trial = 0; trial < 10; ++trial, ++checks) {
      const ComplexVector psi = gaussian_unit_vector(h.rows(), rng);
      const double t1 = phase(rng) / 3.0;
      const double t2 = phase(rng) / 3.0;
      const ComplexVector a = evolve_exact(h, t1, evolve_exact(h, t2, psi));
      const ComplexVector b = evolve_exact(h, t1 + t2, psi);
      check((a - b).norm() < kPropertyTol, "evolution composition");
      const double e0 = psi.dot(h * psi).real();
      const double e1 = b.dot(h * b).real();
      check(std::abs(e1 - e0) < kPropertyTol * std::max(1.0, std::abs(e0)), "energy conservation");
      check(std::abs(b.norm() - 1.0) < kPropertyTol, "evolution norm");
    }
  }

  // Optimizers: never worse than the start, shift-invariant rank shaping.
  for (int trial = 0; trial < 5; ++trial, ++checks) {
    std::vector<double> x0(6);
    for (auto& v : x0) v = phase(rng) - kPi;
    const Objective f = [](std::span<const double> x) {
      double s = 0.0;
      for (std::size_t i = 0; i + 1 < x.size(); ++i) s += std::sin(3 * x[i]) * std::cos(x[i + 1]) + x[i] * x[i];
      return s;
    };
    LocalSearchConfig lc;
    lc.max_evaluations = 300;
    const LocalSearchResult r = minimize_local(f, x0, lc);
    check(r.value <= f(x0), "local search monotone");
    bool trace_ok = true;
    for (std::size_t k = 1; k < r.trace.size(); ++k) trace_ok &= r.trace[k].best <= r.trace[k - 1].best;
    check(trace_ok, "best-so-far trace");
    std::vector<double> raw(20);
    for (auto& v : raw) v = phase(rng);
    std::vector<double> shifted = raw;
    for (auto& v : shifted) v += 17.0;
    check(rank_shape_fitness(raw) == rank_shape_fitness(shifted), "rank shaping shift invariance");
  }

  const double t = seconds_since(t0);
  std::string names;
  for (const auto& f : failed) names += (names.empty() ? "" : ", ") + f;
  return {failed.empty() && t < kPropertySeconds,
          failed.empty() ? fmt("%d randomized property checks, %.1f s", checks, t)
                         : "failed: " + names};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qonn acceptance criteria"};
  Options o;
  std::vector<int> only;
  std::string work = (fs::temp_directory_path() / "qonn-acceptance").string();
  std::string configs = o.configs.string();
  app.add_flag("--smoke", o.smoke, "Reduced variants of the long-running criteria");
  app.add_option("--only", only, "Run only these criteria (1-10)")->check(CLI::Range(1, 10));
  app.add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--work", work, "Scratch directory for run artifacts");
  app.add_option("--configs", configs, "Directory holding the shipped experiment configs");
  CLI11_PARSE(app, argc, argv);
  o.work = work;
  o.configs = configs;

  const std::vector<std::pair<const char*, std::function<Outcome(const Options&)>>> criteria = {
      {"permanent oracle equivalence", permanent_oracle},
      {"lift unitarity", lift_unitarity},
      {"Hong-Ou-Mandel", hong_ou_mandel},
      {"CNOT depth benchmark", cnot_depth},
      {"Ising generalization", ising_generalization},
      {"Bose-Hubbard depth scaling", bose_hubbard_depth},
      {"autoencoder ordering", autoencoder_ordering},
      {"reinforcement learning", reinforcement_learning},
      {"determinism", determinism},
      {"property suites", properties},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[i].second(o);
    } catch (const std::exception& e) {
      out = {false, std::string("error: ") + e.what()};
    }
    failures += !out.pass;
    std::printf("criterion %2d %s  %s: %s [%.1f s]\n", id, out.pass ? "PASS" : "FAIL",
                criteria[i].first, out.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

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

// qonn: run, sweep and evaluate photonic network experiments.
//
// Exit codes: 0 success, 1 a run failed, 2 invalid configuration or usage.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "qonn/runner.hpp"

namespace {

using nlohmann::json;

struct Overrides {
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string out;
};

qonn::ExperimentConfig load(const std::string& path, const Overrides& o) {
  qonn::ExperimentConfig c = qonn::load_experiment_config(path);
  if (o.seed) c.seed = *o.seed;
  if (!o.out.empty()) c.output_dir = o.out;
  c.jobs = o.jobs;
  return c;
}

json summary(const qonn::RunRecord& r, const std::filesystem::path& dir) {
  return {{"ok", r.ok},
          {"diagnostic", r.diagnostic},
          {"config_hash", r.config_hash},
          {"output_dir", dir.string()},
          {"metrics", r.metrics}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum optical neural network experiments"};
  app.require_subcommand(1);

  Overrides o;
  std::string config_path;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Override the root seed");
    sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "Output directory");
  };
  CLI::App* run = app.add_subcommand("run", "Run one experiment");
  add_common(run);
  CLI::App* sweep = app.add_subcommand("sweep", "Run every point of the config's sweep axis");
  add_common(sweep);

  std::string checkpoint_path;
  std::string probes_path;
  CLI::App* eval = app.add_subcommand("eval", "Output distributions of a checkpoint for given probes");
  eval->add_option("checkpoint", checkpoint_path, "checkpoint.json")->required()->check(CLI::ExistingFile);
  eval->add_option("probes", probes_path, "Probe list (JSON)")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", o.out, "Write the result here instead of stdout");
  eval->add_option("--seed", o.seed, "Unused; accepted for symmetry");
  eval->add_option("--jobs", o.jobs, "Unused; accepted for symmetry");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      const qonn::ExperimentConfig c = load(config_path, o);
      const qonn::RunRecord r = qonn::run_experiment(c);
      std::cout << summary(r, c.output_dir).dump(2) << '\n';
      if (!r.ok) std::cerr << "qonn: run failed: " << r.diagnostic << '\n';
      return r.ok ? 0 : 1;
    }
    if (*sweep) {
      const qonn::ExperimentConfig c = load(config_path, o);
      if (!c.sweep) throw qonn::ConfigError("/sweep", "the config declares no sweep axis");
      const auto records = qonn::run_sweep(c);
      json points = json::array();
      bool all_ok = true;
      for (std::size_t i = 0; i < records.size(); ++i) {
        points.push_back(summary(records[i], qonn::sweep_point(c, i).output_dir));
        all_ok = all_ok && records[i].ok;
      }
      std::cout << json{{"summary", (c.output_dir / "summary.csv").string()}, {"points", points}}.dump(2)
                << '\n';
      return all_ok ? 0 : 1;
    }
    // eval
    json checkpoint;
    json probes;
    try {
      checkpoint = json::parse(std::ifstream(checkpoint_path));
      probes = json::parse(std::ifstream(probes_path));
    } catch (const json::parse_error& e) {
      throw qonn::ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    const json result = qonn::evaluate_checkpoint(checkpoint, probes);
    if (o.out.empty()) {
      std::cout << result.dump(2) << '\n';
    } else {
      std::ofstream(o.out) << result.dump(2) << '\n';
    }
    return 0;
  } catch (const qonn::ConfigError& e) {
    std::cerr << "qonn: invalid configuration at " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qonn: " << e.what() << '\n';
    return 1;
  }
}

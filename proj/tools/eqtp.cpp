// Copyright 2026 The eqtp Authors
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

// eqtp command-line front end.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <random>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "eqtp/dataset.hpp"
#include "eqtp/harness.hpp"
#include "eqtp/plot.hpp"
#include "eqtp/properties.hpp"

namespace {

using namespace eqtp;

int DemoGen(const std::string& task, int count, uint64_t seed, const std::string& out) {
  if (count <= 0) throw std::invalid_argument("--count must be positive");
  WriteDataset(out, GenerateDemos(MakeTask(task), count, seed));
  std::cout << "wrote " << count << " demonstrations to " << out << "\n";
  return 0;
}

int TrainCmd(const std::string& config_path, bool baseline, bool goal) {
  RunConfig cfg = RunConfig::Load(config_path);
  if (baseline) cfg.baseline = true;
  if (goal) cfg.goal = true;
  const TrainResult r = RunTraining(cfg, &std::cout);
  const EvalRow& best = r.best();
  std::cout << "best score " << FormatScore(best.score) << " at step " << best.step << "\n";
  return 0;
}

Policy RandomPolicy() {
  return [](const Scene& s) {
    std::mt19937_64 rng(s.seed ^ 0x5151);
    std::uniform_int_distribution<int> row(0, s.height - 1), col(0, s.width - 1);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi);
    const int pu = row(rng), pv = col(rng);
    const double pt = angle(rng) / 2;
    return PickPlaceAction{pu, pv, pt, row(rng), col(rng), angle(rng)};
  };
}

int EvalCmd(const std::string& checkpoint, const std::string& policy, const std::string& task_name,
            int episodes, uint64_t seed, const std::string& csv) {
  if (episodes <= 0) throw std::invalid_argument("--episodes must be positive");
  const TaskSpec task = MakeTask(task_name);
  LoadedModel loaded;
  Policy p;
  std::string source = policy;
  if (policy == "model") {
    if (checkpoint.empty()) throw std::invalid_argument("--checkpoint is required for the model policy");
    loaded = LoadModel(checkpoint);
    if (loaded.config.goal != task.goal_conditioned()) {
      throw std::invalid_argument("checkpoint model " + loaded.config.variant() +
                                  " does not match task " + task_name +
                                  (task.goal_conditioned() ? " (needs a goal model)" : " (no goal image)"));
    }
    if (loaded.config.task != task_name) {
      throw std::invalid_argument("checkpoint was trained on " + loaded.config.task +
                                  ", not " + task_name);
    }
    p = ModelPolicy(*loaded.model);
    source = checkpoint;
  } else if (policy == "oracle") {
    p = OraclePolicy();
  } else if (policy == "random") {
    p = RandomPolicy();
  } else {
    throw std::invalid_argument("unknown policy " + policy);
  }
  const EvalResult r = Evaluate(task, episodes, kEvalSeedOffset + seed, p);
  std::cout << "mean score " << FormatScore(r.mean) << " over " << episodes << " episodes\n";
  if (!csv.empty()) {
    const bool fresh = !std::filesystem::exists(csv);
    std::ofstream out(csv, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("cannot open " + csv);
    if (fresh) out << CsvLine({"source", "task", "episodes", "seed", "mean_score"});
    out << CsvLine({source, task_name, std::to_string(episodes), std::to_string(seed),
                    FormatScore(r.mean)});
  }
  return 0;
}

int VerifyCmd(const props::PropertyOptions& o) {
  const auto rows = props::RunAll(o);
  std::printf("%-28s %-8s %-8s %12s %10s  %s\n", "property", "group", "metric", "residual",
              "tolerance", "result");
  bool ok = true;
  std::set<std::string> seen;
  for (const auto& r : rows) {
    std::printf("%-28s %-8s %-8s %12.3e %10.1e  %s\n", r.id.c_str(), r.group.c_str(),
                r.metric.c_str(), r.residual, r.tolerance, r.pass() ? "PASS" : "FAIL");
    ok = ok && r.pass();
    seen.insert(r.id);
  }
  for (const auto& id : props::ExpectedIds()) {
    if (!seen.count(id)) {
      std::printf("%-28s missing from the run\n", id.c_str());
      ok = false;
    }
  }
  std::printf("%zu properties, %s\n", rows.size(), ok ? "all pass" : "FAILURES");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivariant pick-and-place toolkit"};
  app.require_subcommand(1);

  std::string task = "block-insertion", out, config, checkpoint, policy = "model", csv, plot_csv;
  int count = 10, episodes = 20;
  uint64_t seed = 0;
  bool baseline = false, goal = false;

  auto* demo = app.add_subcommand("demo-gen", "Generate oracle demonstrations");
  demo->add_option("--task", task, "Task name")->required();
  demo->add_option("--count", count, "Number of episodes")->required();
  demo->add_option("--seed", seed, "First scene seed")->required();
  demo->add_option("--out", out, "Dataset file")->required();

  auto* train = app.add_subcommand("train", "Behavior-clone a model from a run config");
  train->add_option("--config", config, "key=value run config")->required()->check(CLI::ExistingFile);
  train->add_flag("--baseline", baseline, "Train the non-equivariant model");
  train->add_flag("--goal", goal, "Goal-stack input");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on unseen seeds");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file");
  eval->add_option("--policy", policy, "model, oracle or random")
      ->check(CLI::IsMember({"model", "oracle", "random"}));
  eval->add_option("--task", task, "Task name")->required();
  eval->add_option("--episodes", episodes, "Number of episodes")->required();
  eval->add_option("--seed", seed, "Evaluation seed offset");
  eval->add_option("--csv", csv, "Append the result row to this CSV");

  props::PropertyOptions vo;
  std::string sabotage;
  double sigma = -1;
  auto* verify = app.add_subcommand("verify", "Run the equivariance property battery");
  verify->add_option("--group", vo.group, "Cyclic group order for the model properties")
      ->check(CLI::Range(2, 64));
  verify->add_option("--tolerance", vo.tolerance, "Override every tolerance");
  verify->add_option("--seeds", vo.seeds, "Random models per property")->check(CLI::PositiveNumber);
  verify->add_option("--trials", vo.trials, "Random inputs per kernel property")
      ->check(CLI::PositiveNumber);
  verify->add_option("--sigma", sigma, "Input smoothing for non-quarter-turn groups");
  verify->add_option("--sabotage", sabotage, "Inject a known defect")
      ->check(CLI::IsMember({"baseline-prop2"}));

  auto* plot = app.add_subcommand("plot", "Plot evaluation reports");
  plot->add_option("--csv", plot_csv, "Report CSV")->required();
  plot->add_option("--out", out, "PNG file")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*demo) return DemoGen(task, count, seed, out);
    if (*train) return TrainCmd(config, baseline, goal);
    if (*eval) return EvalCmd(checkpoint, policy, task, episodes, seed, csv);
    if (*verify) {
      vo.sabotage = sabotage;
      // Rotations off the pixel grid interpolate; smoother inputs keep that
      // error small.
      if (sigma > 0) {
        vo.sigma = sigma;
      } else if (4 % vo.group != 0) {
        vo.sigma = 4.0;
      }
      return VerifyCmd(vo);
    }
    if (*plot) {
      PlotReport(plot_csv, out);
      std::cout << "wrote " << out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

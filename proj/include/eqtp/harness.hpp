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

// Run configuration, augmentation, training loop, parallel evaluation and
// CSV reports.

#ifndef EQTP_HARNESS_HPP_
#define EQTP_HARNESS_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "eqtp/bench.hpp"
#include "eqtp/dataset.hpp"
#include "eqtp/optim.hpp"
#include "eqtp/transporter.hpp"

namespace eqtp {

// Evaluation seeds start here so they never collide with demonstration seeds.
inline constexpr uint64_t kEvalSeedOffset = 1'000'000;

struct RunConfig {
  std::string task = "block-insertion";
  std::string dataset;
  int demos = 10;  // leading demonstrations used from the dataset
  int steps = 2000;
  int batch_size = 1;
  double lr = 1e-4;
  int eval_interval = 1000;
  int eval_episodes = 20;
  uint64_t eval_seed = 0;  // evaluation episodes use kEvalSeedOffset + eval_seed + i
  uint64_t seed = 0;
  std::string out_dir = "run";
  std::string augment = "auto";  // auto | on | off; auto = on for the baseline only
  int augment_shift = 8;         // max integer translation in pixels
  bool baseline = false;
  bool goal = false;
  double stop_score = 2.0;  // stop once an evaluation reaches this score; > 1 disables
  ModelConfig model;

  bool augmentation_enabled() const {
    if (augment == "auto") return baseline;
    return augment == "on";
  }

  ModelConfig EffectiveModel() const {
    ModelConfig m = model;
    m.equivariant = !baseline;
    m.goal = goal;
    return m;
  }

  std::string variant() const {
    return std::string(baseline ? "baseline" : "equivariant") + (goal ? "-goal" : "");
  }

  void Validate() const {
    auto need = [](bool ok, const std::string& msg) {
      if (!ok) throw std::invalid_argument("run config: " + msg);
    };
    const TaskSpec t = MakeTask(task);
    need(demos > 0, "demos must be positive");
    need(steps > 0, "steps must be positive");
    need(batch_size > 0, "batch_size must be positive");
    need(lr > 0 && std::isfinite(lr), "lr must be positive");
    need(eval_interval > 0, "eval_interval must be positive");
    need(eval_episodes > 0, "eval_episodes must be positive");
    need(augment == "auto" || augment == "on" || augment == "off", "augment must be auto|on|off");
    need(augment_shift >= 0, "augment_shift must be non-negative");
    need(goal == t.goal_conditioned(),
         goal ? "task " + task + " has no goal image" : "task " + task + " needs goal=1");
    EffectiveModel().Validate();
  }

  std::string ToString() const {
    std::ostringstream os;
    auto num = [](double v) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      return std::string(buf);
    };
    std::string widths;
    for (size_t i = 0; i < model.unet_widths.size(); ++i) {
      widths += (i ? "," : "") + std::to_string(model.unet_widths[i]);
    }
    os << "task=" << task << "\n"
       << "dataset=" << dataset << "\n"
       << "demos=" << demos << "\n"
       << "steps=" << steps << "\n"
       << "batch_size=" << batch_size << "\n"
       << "lr=" << num(lr) << "\n"
       << "eval_interval=" << eval_interval << "\n"
       << "eval_episodes=" << eval_episodes << "\n"
       << "eval_seed=" << eval_seed << "\n"
       << "seed=" << seed << "\n"
       << "out_dir=" << out_dir << "\n"
       << "augment=" << augment << "\n"
       << "augment_shift=" << augment_shift << "\n"
       << "baseline=" << (baseline ? 1 : 0) << "\n"
       << "goal=" << (goal ? 1 : 0) << "\n"
       << "stop_score=" << num(stop_score) << "\n"
       << "model.n_place=" << model.n_place << "\n"
       << "model.n_pick=" << model.n_pick << "\n"
       << "model.hidden_order=" << model.hidden_order << "\n"
       << "model.pick_crop=" << model.pick_crop << "\n"
       << "model.place_crop=" << model.place_crop << "\n"
       << "model.pad_size=" << model.pad_size << "\n"
       << "model.unet_widths=" << widths << "\n"
       << "model.crop_width=" << model.crop_width << "\n"
       << "model.crop_blocks=" << model.crop_blocks << "\n"
       << "model.kernel=" << model.kernel << "\n"
       << "model.place_dim=" << model.place_dim << "\n"
       << "model.obs_channels=" << model.obs_channels << "\n"
       << "model.head_init=" << num(model.head_init) << "\n";
    return os.str();
  }

  // Line-delimited key=value; blank lines and '#' comments are skipped.
  // Unknown or repeated keys are errors.
  static RunConfig Parse(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::map<std::string, int> seen;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      const auto eq = line.find('=');
      auto fail = [&](const std::string& msg) {
        throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + msg);
      };
      if (eq == std::string::npos) fail("expected key=value");
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (seen.count(key)) fail("duplicate key '" + key + "'");
      seen[key] = lineno;
      try {
        c.Set(key, value);
      } catch (const std::invalid_argument& e) {
        fail(e.what());
      } catch (const std::out_of_range&) {
        fail("value out of range for '" + key + "'");
      }
    }
    return c;
  }

  static RunConfig Load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return Parse(ss.str());
  }

  void Set(const std::string& key, const std::string& value) {
    auto to_int = [&](const std::string& v) {
      size_t pos = 0;
      const long long x = std::stoll(v, &pos);
      if (pos != v.size() || x < INT32_MIN || x > INT32_MAX) {
        throw std::invalid_argument("bad integer '" + v + "' for " + key);
      }
      return static_cast<int>(x);
    };
    auto to_u64 = [&](const std::string& v) {
      size_t pos = 0;
      if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative value for " + key);
      const unsigned long long x = std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("bad integer '" + v + "' for " + key);
      return static_cast<uint64_t>(x);
    };
    auto to_double = [&](const std::string& v) {
      size_t pos = 0;
      const double x = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("bad number '" + v + "' for " + key);
      return x;
    };
    auto to_bool = [&](const std::string& v) {
      if (v == "1" || v == "true") return true;
      if (v == "0" || v == "false") return false;
      throw std::invalid_argument("bad boolean '" + v + "' for " + key);
    };
    if (key == "task") task = value;
    else if (key == "dataset") dataset = value;
    else if (key == "demos") demos = to_int(value);
    else if (key == "steps") steps = to_int(value);
    else if (key == "batch_size") batch_size = to_int(value);
    else if (key == "lr") lr = to_double(value);
    else if (key == "eval_interval") eval_interval = to_int(value);
    else if (key == "eval_episodes") eval_episodes = to_int(value);
    else if (key == "eval_seed") eval_seed = to_u64(value);
    else if (key == "seed") seed = to_u64(value);
    else if (key == "out_dir") out_dir = value;
    else if (key == "augment") augment = value;
    else if (key == "augment_shift") augment_shift = to_int(value);
    else if (key == "baseline") baseline = to_bool(value);
    else if (key == "goal") goal = to_bool(value);
    else if (key == "stop_score") stop_score = to_double(value);
    else if (key == "model.n_place") model.n_place = to_int(value);
    else if (key == "model.n_pick") model.n_pick = to_int(value);
    else if (key == "model.hidden_order") model.hidden_order = to_int(value);
    else if (key == "model.pick_crop") model.pick_crop = to_int(value);
    else if (key == "model.place_crop") model.place_crop = to_int(value);
    else if (key == "model.pad_size") model.pad_size = to_int(value);
    else if (key == "model.unet_widths") {
      model.unet_widths.clear();
      std::istringstream ws(value);
      std::string item;
      while (std::getline(ws, item, ',')) model.unet_widths.push_back(to_int(item));
    }
    else if (key == "model.crop_width") model.crop_width = to_int(value);
    else if (key == "model.crop_blocks") model.crop_blocks = to_int(value);
    else if (key == "model.kernel") model.kernel = to_int(value);
    else if (key == "model.place_dim") model.place_dim = to_int(value);
    else if (key == "model.obs_channels") model.obs_channels = to_int(value);
    else if (key == "model.head_init") model.head_init = to_double(value);
    else throw std::invalid_argument("unknown key '" + key + "'");
  }
};

// Quarter turns about the image center map pixel (r, c) to (W - 1 - c, r).
inline void RotatePixel(int* r, int* c, int size, int quarter_turns) {
  for (int k = 0; k < internal::PositiveMod(quarter_turns, 4); ++k) {
    const int nr = size - 1 - *c, nc = *r;
    *r = nr;
    *c = nc;
  }
}

// Rotates the input by k quarter turns, then shifts it by (dr, dc) with zero
// fill; the action follows. Pick angles turn modulo pi; the place delta is
// unchanged.
inline void TransformExample(FeatureField* input, PickPlaceAction* a, int k, int dr, int dc) {
  if (input->height() != input->width()) throw std::invalid_argument("augmentation needs square inputs");
  const int n = input->height();
  *input = RotateBase(*input, GroupElement::Cyclic(4, k), Interp::kNearest);
  RotatePixel(&a->pick_u, &a->pick_v, n, k);
  RotatePixel(&a->place_u, &a->place_v, n, k);
  a->pick_theta = std::fmod(a->pick_theta + k * std::numbers::pi / 2, std::numbers::pi);
  if (dr != 0 || dc != 0) {
    FeatureField shifted = *input;
    std::fill(shifted.data().begin(), shifted.data().end(), 0.0);
    for (int ch = 0; ch < input->channels(); ++ch) {
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
          const int sr = r - dr, sc = c - dc;
          if (sr >= 0 && sr < n && sc >= 0 && sc < n) shifted.at(ch, r, c) = input->at(ch, sr, sc);
        }
      }
    }
    *input = std::move(shifted);
    a->pick_u += dr;
    a->pick_v += dc;
    a->place_u += dr;
    a->place_v += dc;
  }
}

// Random C4 rotation plus integer translation that keeps both action pixels
// inside the image.
inline void Augment(FeatureField* input, PickPlaceAction* a, int max_shift, std::mt19937_64& rng) {
  const int n = input->height();
  const int k = static_cast<int>(rng() % 4);
  PickPlaceAction rotated = *a;
  RotatePixel(&rotated.pick_u, &rotated.pick_v, n, k);
  RotatePixel(&rotated.place_u, &rotated.place_v, n, k);
  auto range = [&](int x, int y) {
    return std::pair{std::max(-max_shift, -std::min(x, y)),
                     std::min(max_shift, n - 1 - std::max(x, y))};
  };
  const auto [r_lo, r_hi] = range(rotated.pick_u, rotated.place_u);
  const auto [c_lo, c_hi] = range(rotated.pick_v, rotated.place_v);
  const int dr = r_lo + static_cast<int>(rng() % (r_hi - r_lo + 1));
  const int dc = c_lo + static_cast<int>(rng() % (c_hi - c_lo + 1));
  TransformExample(input, a, k, dr, dc);
}

// Worker count: EQTP_THREADS if set, otherwise the hardware concurrency.
inline int ThreadCount() {
  if (const char* env = std::getenv("EQTP_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

using Policy = std::function<PickPlaceAction(const Scene&)>;

struct EvalResult {
  std::vector<double> scores;  // by episode, in seed order
  double mean = 0.0;
};

// Runs `episodes` episodes with seeds first_seed + i, in parallel; results
// do not depend on the thread count.
inline EvalResult Evaluate(const TaskSpec& task, int episodes, uint64_t first_seed,
                           const Policy& policy, int threads = ThreadCount()) {
  if (episodes <= 0) throw std::invalid_argument("episodes must be positive");
  EvalResult r;
  r.scores.assign(episodes, 0.0);
  std::vector<std::string> errors(episodes);
  auto run = [&](int worker, int stride) {
    for (int i = worker; i < episodes; i += stride) {
      try {
        Scene s = Reset(task, first_seed + i);
        for (int step = 0; step < task.max_steps && Success(s) < 1.0; ++step) Step(s, policy(s));
        r.scores[i] = Success(s);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int n = std::max(1, std::min(threads, episodes));
  if (n == 1) {
    run(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(run, t, n);
    for (auto& t : pool) t.join();
  }
  for (int i = 0; i < episodes; ++i) {
    if (!errors[i].empty()) {
      throw std::runtime_error("episode seed " + std::to_string(first_seed + i) + ": " + errors[i]);
    }
  }
  double sum = 0;
  for (double s : r.scores) sum += s;
  r.mean = sum / episodes;
  return r;
}

inline Policy OraclePolicy() {
  return [](const Scene& s) { return Oracle(s); };
}

template <typename T>
Policy ModelPolicy(const TransporterModel<T>& model) {
  return [&model](const Scene& s) { return model.Act(Observe(s)); };
}

struct EvalRow {
  int step = 0;
  double score = 0.0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  std::vector<EvalRow> rows;
  int steps_done = 0;
  bool stopped_early = false;

  const EvalRow& best() const {
    if (rows.empty()) throw std::logic_error("no evaluations");
    size_t b = 0;
    for (size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].score > rows[b].score) b = i;
    }
    return rows[b];
  }

  // First evaluated step whose score reaches `threshold`, or -1.
  int FirstStepReaching(double threshold) const {
    for (const auto& r : rows) {
      if (r.score >= threshold) return r.step;
    }
    return -1;
  }
};

struct TrainHooks {
  std::function<void(const EvalRow&, const TransporterModel<float>&)> on_eval;
  std::function<void(int step, double loss)> on_step;
};

// Behavior cloning with Adam on the leading cfg.demos demonstrations.
// Evaluates at step 0, every eval_interval steps and at the end. Throws on a
// non-finite loss naming the step.
inline TrainResult Train(const RunConfig& cfg, const std::vector<Demonstration>& data,
                         TransporterModel<float>& model, const TrainHooks& hooks = {}) {
  cfg.Validate();
  if (static_cast<int>(data.size()) < cfg.demos) {
    throw std::invalid_argument("dataset has " + std::to_string(data.size()) +
                                " demonstrations, config wants " + std::to_string(cfg.demos));
  }
  for (int i = 0; i < cfg.demos; ++i) {
    if (data[i].task != cfg.task) {
      throw std::invalid_argument("dataset task " + data[i].task + " does not match " + cfg.task);
    }
    if (data[i].Input().channels() != model.config().input_channels()) {
      throw std::invalid_argument("dataset observation channels do not match the model");
    }
    if (data[i].seed >= kEvalSeedOffset) {
      throw std::invalid_argument("demonstration seed " + std::to_string(data[i].seed) +
                                  " overlaps the evaluation seed range");
    }
  }
  const TaskSpec task = MakeTask(cfg.task);
  const bool augment = cfg.augmentation_enabled();
  std::mt19937_64 rng(cfg.seed ^ 0xA5A5A5A5ULL);
  Adam<float> opt(&model.params(), AdamOptions{.lr = cfg.lr});
  const auto start = std::chrono::steady_clock::now();
  TrainResult result;
  auto evaluate = [&](int step) {
    const EvalResult e = Evaluate(task, cfg.eval_episodes, kEvalSeedOffset + cfg.eval_seed,
                                  ModelPolicy(model));
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.rows.push_back({step, e.mean, wall});
    if (hooks.on_eval) hooks.on_eval(result.rows.back(), model);
    return e.mean;
  };
  if (evaluate(0) >= cfg.stop_score) {
    result.stopped_early = true;
    return result;
  }
  for (int step = 1; step <= cfg.steps; ++step) {
    model.params().ZeroGrad();
    double total = 0;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const Demonstration& d = data[rng() % cfg.demos];
      FeatureField input = d.Input();
      PickPlaceAction a = d.action;
      if (augment) Augment(&input, &a, cfg.augment_shift, rng);
      ad::Tensor<float> loss = model.Loss(ad::Tensor<float>::FromField(input), a);
      if (cfg.batch_size > 1) loss = ad::Scale(loss, 1.0f / cfg.batch_size);
      if (!std::isfinite(loss.item())) {
        throw std::runtime_error("non-finite loss at step " + std::to_string(step));
      }
      total += loss.item();
      ad::Backward(loss);
    }
    opt.Step();
    result.steps_done = step;
    if (hooks.on_step) hooks.on_step(step, total);
    if (step % cfg.eval_interval == 0 || step == cfg.steps) {
      if (evaluate(step) >= cfg.stop_score) {
        result.stopped_early = step < cfg.steps;
        break;
      }
    }
  }
  return result;
}

// RFC 4180 field quoting.
inline std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string CsvLine(const std::vector<std::string>& fields) {
  std::string line;
  for (size_t i = 0; i < fields.size(); ++i) line += (i ? "," : "") + CsvField(fields[i]);
  return line + "\r\n";
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> row_lines;  // 1-based source line of each row

  int Column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
};

// Parses RFC 4180 text (CRLF or LF line ends). Errors name the line.
inline CsvTable ParseCsv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<int> lines;
  std::vector<std::string> record;
  std::string field;
  int line = 1, record_line = 1;
  bool quoted = false, field_started = false, after_quote = false;
  auto end_field = [&] {
    record.push_back(field);
    field.clear();
    field_started = after_quote = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) {
      records.push_back(record);
      lines.push_back(record_line);
    }
    record.clear();
  };
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
          after_quote = true;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      if (field_started) throw std::invalid_argument("CSV line " + std::to_string(line) + ": stray quote");
      quoted = field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
      ++line;
      record_line = line;
    } else {
      if (after_quote) {
        throw std::invalid_argument("CSV line " + std::to_string(line) + ": text after closing quote");
      }
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw std::invalid_argument("CSV line " + std::to_string(record_line) + ": unterminated quote");
  if (field_started || !record.empty()) end_record();
  if (records.empty()) throw std::invalid_argument("CSV is empty");
  CsvTable t;
  t.header = records[0];
  for (size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != t.header.size()) {
      throw std::invalid_argument("CSV line " + std::to_string(lines[i]) + ": expected " +
                                  std::to_string(t.header.size()) + " fields, got " +
                                  std::to_string(records[i].size()));
    }
    t.rows.push_back(records[i]);
    t.row_lines.push_back(lines[i]);
  }
  return t;
}

inline std::string FormatScore(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Deterministic evaluation report (no timings).
inline std::string ReportCsv(const RunConfig& cfg, const TrainResult& r) {
  std::string out = CsvLine({"step", "mean_score", "episodes", "best", "variant", "augment",
                             "task", "demos", "seed"});
  const int best_step = r.rows.empty() ? -1 : r.best().step;
  for (const auto& row : r.rows) {
    out += CsvLine({std::to_string(row.step), FormatScore(row.score),
                    std::to_string(cfg.eval_episodes), row.step == best_step ? "1" : "0",
                    cfg.variant(), cfg.augmentation_enabled() ? "on" : "off", cfg.task,
                    std::to_string(cfg.demos), std::to_string(cfg.seed)});
  }
  return out;
}

inline std::string TimingCsv(const TrainResult& r) {
  std::string out = CsvLine({"step", "wall_seconds"});
  for (const auto& row : r.rows) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", row.wall_seconds);
    out += CsvLine({std::to_string(row.step), buf});
  }
  return out;
}

inline void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Model rebuilt from a checkpoint's embedded run config.
struct LoadedModel {
  RunConfig config;
  std::unique_ptr<TransporterModel<float>> model;
};

inline LoadedModel LoadModel(const std::string& path) {
  const Checkpoint ck = ReadCheckpoint(path);
  LoadedModel m;
  m.config = RunConfig::Parse(ck.config_text);
  m.model = std::make_unique<TransporterModel<float>>(m.config.EffectiveModel(), m.config.seed);
  LoadParameters(ck, m.model->params());
  return m;
}

// Full `train` command: writes report.csv, timing.csv, config.txt,
// best.eqck and last.eqck under cfg.out_dir.
inline TrainResult RunTraining(const RunConfig& cfg, std::ostream* log = nullptr) {
  cfg.Validate();
  if (cfg.dataset.empty()) throw std::invalid_argument("run config: dataset path is required");
  const auto data = ReadDataset(cfg.dataset);
  std::filesystem::create_directories(cfg.out_dir);
  const std::string dir = cfg.out_dir + "/";
  WriteText(dir + "config.txt", cfg.ToString());
  TransporterModel<float> model(cfg.EffectiveModel(), cfg.seed);
  double best = -1;
  TrainHooks hooks;
  hooks.on_eval = [&](const EvalRow& row, const TransporterModel<float>& m) {
    if (log) *log << "step " << row.step << " score " << FormatScore(row.score) << "\n" << std::flush;
    if (row.score > best) {
      best = row.score;
      SaveCheckpoint(dir + "best.eqck", m.params(), cfg.ToString());
    }
  };
  hooks.on_step = [&](int step, double loss) {
    if (log && step % 100 == 0) *log << "step " << step << " loss " << loss << "\n";
  };
  const TrainResult r = Train(cfg, data, model, hooks);
  SaveCheckpoint(dir + "last.eqck", model.params(), cfg.ToString());
  WriteText(dir + "report.csv", ReportCsv(cfg, r));
  WriteText(dir + "timing.csv", TimingCsv(r));
  return r;
}

}  // namespace eqtp

#endif  // EQTP_HARNESS_HPP_

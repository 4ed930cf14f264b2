// Copyright 2026 The asd Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <optional>
#include <regex>
#include <stdexcept>

#include "CLI11.hpp"
#include "asd/data_io.h"
#include "asd/evaluator.h"
#include "asd/latent_trainer.h"
#include "asd/model_core.h"
#include "asd/online_adapter.h"
#include "asd/speaker_adapt.h"
#include "asd/synthetic.h"
#include "asd/text_format.h"

namespace asd::cli {
namespace {

namespace fs = std::filesystem;

// Usage problem detected after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void WriteFile(const fs::path& path,
               const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  body(out);
  out.flush();
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

fs::path ModelPath(const fs::path& dir, int track) {
  return dir / ("track_" + std::to_string(track) + ".model");
}

std::map<int, ModelWeights> LoadModelDir(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw DataError("model directory '" + dir.string() + "' does not exist");
  }
  static const std::regex kName(R"(track_(\d+)\.model)");
  std::map<int, ModelWeights> models;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (!std::regex_match(name, m, kName)) continue;
    models[std::stoi(m[1].str())] = LoadModel(entry.path().string());
  }
  if (models.empty()) {
    throw DataError("no track_<id>.model files in '" + dir.string() + "'");
  }
  return models;
}

void RequireGroundTruth(const TrackedDataset& data, const std::string& path) {
  if (!data.HasGroundTruth()) {
    throw DataError(path +
                    ": evaluation needs a ground-truth label (gt = 1 or -1) on "
                    "every box");
  }
}

// Expands `key=value` lines of --config files into `--key=value` arguments
// placed right after the subcommand, so later command-line flags win.
std::vector<std::string> ExpandConfig(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::vector<std::string> injected;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file path");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
      continue;
    }
    for (auto [key, value] : ReadKeyValueFile(path)) {
      std::replace(key.begin(), key.end(), '_', '-');
      injected.push_back("--" + key + "=" + value);
    }
  }
  if (injected.empty()) return rest;
  const auto sub = std::find_if(rest.begin(), rest.end(), [](const auto& a) {
    return a.empty() || a[0] != '-';
  });
  if (sub == rest.end()) throw UsageError("--config given without a subcommand");
  rest.insert(sub + 1, injected.begin(), injected.end());
  return rest;
}

struct GenArgs {
  SynthConfig synth;
  std::string out;
  bool append_bias = false;
};

int RunGen(const GenArgs& a, std::ostream& out) {
  TrackedDataset data = GenerateSynthetic(a.synth);
  if (a.append_bias) data = AppendBiasFeature(std::move(data));
  const fs::path manifest(a.out);
  if (manifest.has_parent_path()) fs::create_directories(manifest.parent_path());
  SaveDataset(data, a.out);
  out << "wrote " << a.out << ": " << data.frames.size() << " frames, "
      << data.track_ids.size() << " tracks, dim " << data.dim << '\n';
  return kExitOk;
}

struct TrainGenericArgs {
  std::string data;
  std::string loss = "softmax";
  TrainConfig train;
  std::string out_model;
  std::string out_trace;
};

int RunTrainGeneric(TrainGenericArgs a, std::ostream& out, std::ostream& err) {
  a.train.loss_kind = ParseLossKind(a.loss);
  const TrackedDataset data = LoadDataset(a.data);
  const LatentTrainResult result = TrainLatent(data, a.train);
  const std::string trace =
      a.out_trace.empty() ? a.out_model + ".trace.csv" : a.out_trace;
  WriteFile(a.out_model, [&](std::ostream& o) { WriteModel(o, result.model); });
  WriteFile(trace, [&](std::ostream& o) { WriteTraceCsv(o, result.trace); });
  const TraceRow& last = result.trace.back();
  if (!result.converged) {
    err << "warning: gradient tolerance not reached: " << result.message << '\n';
  }
  out << "iterations " << last.iter << " objective "
      << FormatDouble(last.objective) << " grad_norm "
      << FormatDouble(last.grad_norm) << '\n';
  return kExitOk;
}

struct TrainSpecificArgs {
  std::string data;
  std::string generic_model;
  HarvestConfig harvest;
  bool no_weighting = false;
  TrainConfig train;
  std::string out_dir;
};

int RunTrainSpecific(TrainSpecificArgs a, std::ostream& out, std::ostream& err) {
  a.harvest.weighting_enabled = !a.no_weighting;
  const TrackedDataset data = LoadDataset(a.data);
  const ModelWeights generic = LoadModel(a.generic_model);
  if (generic.dim() != data.dim) throw DimensionMismatch(data.dim, generic.dim());
  const SampleMap samples = HarvestSamples(generic, data, a.harvest);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  WriteFile(dir / "harvest.csv", [&](std::ostream& o) { WriteHarvestCsv(o, samples); });
  int written = 0;
  for (int track : data.track_ids) {
    const auto it = samples.find(track);
    const std::vector<WeightedSample> none;
    const auto& set = it == samples.end() ? none : it->second;
    const bool pos = std::any_of(set.begin(), set.end(), [](const auto& s) {
      return s.label == Label::kPositive;
    });
    const bool neg = std::any_of(set.begin(), set.end(), [](const auto& s) {
      return s.label == Label::kNegative;
    });
    if (!pos || !neg) {
      err << "warning: track " << track << " has "
          << (pos ? "no negative" : "no positive") << " samples; skipped\n";
      continue;
    }
    ModelWeights model = TrainSpecific(set, a.train);
    model.metadata = "specific track=" + std::to_string(track) +
                     " weighting=" + (a.no_weighting ? "off" : "on");
    WriteFile(ModelPath(dir, track), [&](std::ostream& o) { WriteModel(o, model); });
    ++written;
  }
  out << "wrote " << written << " speaker models to " << dir.string() << '\n';
  return kExitOk;
}

struct OnlineArgs {
  std::string target_data;
  std::string generic_model;
  OnlineSchedule schedule;
  HarvestConfig harvest;
  bool no_weighting = false;
  bool no_balance = false;
  TrainConfig train;
  std::string out_dir;
};

int RunOnlineCmd(OnlineArgs a, std::ostream& out) {
  a.harvest.weighting_enabled = !a.no_weighting;
  a.schedule.balance = !a.no_balance;
  const TrackedDataset data = LoadDataset(a.target_data);
  RequireGroundTruth(data, a.target_data);
  const ModelWeights generic = LoadModel(a.generic_model);
  const OnlineResult result =
      RunOnline(data, generic, a.schedule, a.harvest, a.train);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  WriteFile(dir / "curve.csv", [&](std::ostream& o) { WriteCurveCsv(o, result.curve); });
  for (const auto& [track, model] : result.models) {
    WriteFile(ModelPath(dir, track), [&](std::ostream& o) { WriteModel(o, model); });
  }
  out << "rows " << result.curve.size() << " row0_mean_auc "
      << FormatDouble(result.curve.front().mean_auc) << " final_mean_auc "
      << FormatDouble(result.curve.back().mean_auc) << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::string data;
  std::string model;
  std::string model_dir;
  double smooth_seconds = 3.0;
  std::string out;
};

std::vector<int> WindowGrid(double max_seconds, double fps) {
  std::vector<int> windows;
  const int steps = static_cast<int>(std::floor(max_seconds / 0.25 + 1e-9));
  for (int k = 0; k <= steps; ++k) {
    const int w = SmoothingWindowFrames(0.25 * k, fps);
    if (windows.empty() || windows.back() != w) windows.push_back(w);
  }
  const int last = SmoothingWindowFrames(max_seconds, fps);
  if (windows.back() != last) windows.push_back(last);
  return windows;
}

int RunEval(const EvalArgs& a, std::ostream& out) {
  if (a.model.empty() && a.model_dir.empty()) {
    throw UsageError("eval needs --model or --model-dir");
  }
  if (a.smooth_seconds < 0.0) throw UsageError("--smooth-seconds must be >= 0");
  const TrackedDataset data = LoadDataset(a.data);
  RequireGroundTruth(data, a.data);
  std::optional<ModelWeights> prior;
  if (!a.model.empty()) prior = LoadModel(a.model);
  std::map<int, ModelWeights> specific;
  if (!a.model_dir.empty()) specific = LoadModelDir(a.model_dir);
  const TrackScorer scorer(prior, specific);

  const AucSummary auc = EvaluateAuc(data, scorer);
  const ScoredSeries series = ScoreDataset(data, scorer);
  const std::vector<TrackDecisions> tracks = ThresholdDecisions(series);
  const std::vector<int> windows = WindowGrid(a.smooth_seconds, data.frame_rate_hz);
  const std::vector<FCurvePoint> fcurve = FScoreCurve(tracks, windows);
  std::map<int, double> thresholds;
  for (const TrackDecisions& t : tracks) thresholds[t.track_id] = t.threshold;
  // Single-class tracks have no threshold and stay off the timeline.
  ScoredSeries thresholded;
  std::copy_if(series.begin(), series.end(), std::back_inserter(thresholded),
               [&](const ScoredEntry& e) { return thresholds.count(e.track_id) > 0; });
  const std::vector<TimelineRow> timeline = BuildTimeline(
      thresholded, thresholds,
      SmoothingWindowFrames(a.smooth_seconds, data.frame_rate_hz));

  const EvalReport report = Summarize({FoldResult{0, auc.per_track, auc.mean}});
  const fs::path dir(a.out);
  fs::create_directories(dir);
  WriteFile(dir / "auc.csv", [&](std::ostream& o) { WriteReportCsv(o, report); });
  WriteFile(dir / "fcurve.csv", [&](std::ostream& o) { WriteFCurveCsv(o, fcurve); });
  WriteFile(dir / "timeline.csv",
            [&](std::ostream& o) { WriteTimelineCsv(o, timeline); });

  for (const auto& [track, value] : auc.per_track) {
    out << "speaker " << track << " auc " << FormatDouble(value) << '\n';
  }
  out << "mean_auc " << FormatDouble(auc.mean) << '\n';
  return kExitOk;
}

struct ReportArgs {
  std::vector<std::string> data;
  std::string mode = "generic";
  std::string loss = "softmax";
  TrainConfig train;
  HarvestConfig harvest;
  bool no_weighting = false;
  std::string out;
};

int RunReport(ReportArgs a, std::ostream& out, std::ostream& err) {
  a.train.loss_kind = ParseLossKind(a.loss);
  a.harvest.weighting_enabled = !a.no_weighting;
  if (a.data.size() < 2) throw UsageError("report needs at least two --data folds");
  if (a.mode != "generic" && a.mode != "specific") {
    throw UsageError("--mode must be generic or specific, got '" + a.mode + "'");
  }
  std::vector<TrackedDataset> folds;
  for (const std::string& path : a.data) {
    folds.push_back(LoadDataset(path));
    RequireGroundTruth(folds.back(), path);
  }
  const TrainFn train = [&](const TrackedDataset& set) -> TrackScorer {
    ModelWeights generic = TrainLatent(set, a.train).model;
    if (a.mode == "generic") return TrackScorer(generic);
    std::map<int, ModelWeights> specific;
    const SampleMap samples = HarvestSamples(generic, set, a.harvest);
    for (int track : set.track_ids) {
      const auto it = samples.find(track);
      try {
        if (it == samples.end()) throw DataError("no samples");
        specific[track] = TrainSpecific(it->second, a.train);
      } catch (const DataError& e) {
        err << "warning: track " << track << ": " << e.what()
            << "; using the generic model\n";
        specific[track] = generic;
      }
    }
    return TrackScorer(std::nullopt, std::move(specific));
  };
  const EvalReport report = Loocv(folds, train);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  WriteFile(dir / "report.csv", [&](std::ostream& o) { WriteReportCsv(o, report); });
  WriteFile(dir / "summary.csv", [&](std::ostream& o) { WriteSummaryCsv(o, report); });

  char line[96];
  out << "speaker  mean_auc  std\n";
  for (const auto& [track, ms] : report.per_speaker) {
    std::snprintf(line, sizeof(line), "%7d  %8.2f  %4.2f\n", track, ms.mean, ms.std);
    out << line;
  }
  std::snprintf(line, sizeof(line), "%7s  %8.2f  %4.2f\n", "mean",
                report.mean_auc.mean, report.mean_auc.std);
  out << line;
  return kExitOk;
}

void AddTrainFlags(CLI::App* cmd, TrainConfig& train) {
  cmd->add_option("--C", train.C, "Regularization weight")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iters", train.max_iters, "L-BFGS iteration cap")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--grad-tol", train.grad_tol, "Gradient infinity-norm tolerance")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int RunCli(const std::vector<std::string>& raw_args, std::ostream& out,
           std::ostream& err) {
  CLI::App app("Active speaker detection: latent training and adaptation", "asd");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a synthetic dataset");
  {
    SynthConfig& s = gen.synth;
    gen_cmd->add_option("--out", gen.out, "Manifest path")->required();
    gen_cmd->add_option("--num-speakers", s.num_speakers);
    gen_cmd->add_option("--dim", s.dim);
    gen_cmd->add_option("--frames", s.frames);
    gen_cmd->add_option("--frame-rate-hz", s.frame_rate_hz);
    gen_cmd->add_option("--turn-persistence", s.turn_persistence);
    gen_cmd->add_option("--silence-prob", s.silence_prob);
    gen_cmd->add_option("--signal", s.signal);
    gen_cmd->add_option("--speaker-shift", s.speaker_shift);
    gen_cmd->add_option("--noise-sigma", s.noise_sigma);
    gen_cmd->add_option("--vad-error-rate", s.vad_error_rate);
    gen_cmd->add_option("--seed", s.seed);
    gen_cmd->add_option("--speaker-seed", s.speaker_seed);
    gen_cmd->add_option("--first-track", s.first_track);
    gen_cmd->add_flag("--append-bias", gen.append_bias, "Append a constant feature");
  }

  TrainGenericArgs tg;
  CLI::App* tg_cmd =
      app.add_subcommand("train-generic", "Latent training from VAD labels");
  tg_cmd->add_option("--data", tg.data, "Dataset manifest")->required();
  tg_cmd->add_option("--loss", tg.loss, "softmax or maxmargin");
  tg_cmd->add_option("--beta", tg.train.beta, "Soft-max sharpness")
      ->check(CLI::PositiveNumber);
  tg_cmd->add_option("--seed", tg.train.seed, "Recorded in model metadata");
  AddTrainFlags(tg_cmd, tg.train);
  tg_cmd->add_option("--out-model", tg.out_model, "Model file")->required();
  tg_cmd->add_option("--out-trace", tg.out_trace,
                     "Trace CSV (default <out-model>.trace.csv)");

  TrainSpecificArgs ts;
  CLI::App* ts_cmd = app.add_subcommand(
      "train-specific", "Per-speaker retraining on harvested samples");
  ts_cmd->add_option("--data", ts.data, "Dataset manifest")->required();
  ts_cmd->add_option("--generic-model", ts.generic_model)->required();
  ts_cmd->add_option("--window-seconds", ts.harvest.window_seconds)
      ->check(CLI::PositiveNumber);
  ts_cmd->add_flag("--no-temporal-weighting", ts.no_weighting);
  ts_cmd->add_flag("--include-vad-negative", ts.harvest.include_vad_negative);
  AddTrainFlags(ts_cmd, ts.train);
  ts_cmd->add_option("--out-dir", ts.out_dir)->required();

  OnlineArgs on;
  CLI::App* on_cmd =
      app.add_subcommand("online", "Online adaptation to unseen speakers");
  on_cmd->add_option("--target-data", on.target_data)->required();
  on_cmd->add_option("--generic-model", on.generic_model)->required();
  on_cmd->add_option("--budget-seconds", on.schedule.max_seconds_per_speaker)
      ->check(CLI::PositiveNumber);
  on_cmd->add_option("--batch-frames", on.schedule.batch_frames,
                     "Frames per iteration (default one second)")
      ->check(CLI::PositiveNumber);
  on_cmd->add_option("--window-seconds", on.harvest.window_seconds)
      ->check(CLI::PositiveNumber);
  on_cmd->add_flag("--no-temporal-weighting", on.no_weighting);
  on_cmd->add_flag("--no-balance", on.no_balance);
  on_cmd->add_flag("--warm-start", on.schedule.warm_start);
  AddTrainFlags(on_cmd, on.train);
  on_cmd->add_option("--out-dir", on.out_dir)->required();

  EvalArgs ev;
  CLI::App* ev_cmd = app.add_subcommand("eval", "AUC, F-score curve and timeline");
  ev_cmd->add_option("--data", ev.data)->required();
  ev_cmd->add_option("--model", ev.model, "Generic model, added to every track");
  ev_cmd->add_option("--model-dir", ev.model_dir, "Directory of track_<id>.model");
  ev_cmd->add_option("--smooth-seconds", ev.smooth_seconds);
  ev_cmd->add_option("--out", ev.out, "Output directory")->required();

  ReportArgs rp;
  CLI::App* rp_cmd =
      app.add_subcommand("report", "Leave-one-out report over dataset folds");
  rp_cmd->add_option("--data", rp.data, "One manifest per fold")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  rp_cmd->add_option("--mode", rp.mode, "generic or specific");
  rp_cmd->add_option("--loss", rp.loss, "softmax or maxmargin");
  rp_cmd->add_option("--beta", rp.train.beta)->check(CLI::PositiveNumber);
  AddTrainFlags(rp_cmd, rp.train);
  rp_cmd->add_option("--window-seconds", rp.harvest.window_seconds)
      ->check(CLI::PositiveNumber);
  rp_cmd->add_flag("--no-temporal-weighting", rp.no_weighting);
  rp_cmd->add_option("--out", rp.out, "Output directory")->required();

  try {
    std::vector<std::string> args = ExpandConfig(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }

  try {
    if (*gen_cmd) return RunGen(gen, out);
    if (*tg_cmd) return RunTrainGeneric(tg, out, err);
    if (*ts_cmd) return RunTrainSpecific(ts, out, err);
    if (*on_cmd) return RunOnlineCmd(on, out);
    if (*ev_cmd) return RunEval(ev, out);
    if (*rp_cmd) return RunReport(rp, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DimensionMismatch& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    err << "error: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace asd::cli

#include "dfdetect/cli/commands.hpp"

#include <fstream>
#include <ostream>
#include <set>

#include "dfdetect/checkpoint.hpp"
#include "dfdetect/dataset.hpp"
#include "dfdetect/error.hpp"
#include "json.hpp"

namespace dfdetect::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

void prepare_output_dir(const fs::path& dir, bool overwrite) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) fail(ErrorKind::usage, "run.not_a_directory", "not a directory: " + dir.string());
    if (!fs::is_empty(dir) && !overwrite)
      fail(ErrorKind::usage, "run.dir_exists",
           "run directory is not empty: " + dir.string() + " (use a fresh directory or --overwrite)");
  }
  fs::create_directories(dir);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) fail(ErrorKind::runtime, "io.write_failed", "cannot write " + path.string());
}

InputShape infer_input_shape(const DatasetManifest& manifest) {
  const auto& first = manifest.records().front();
  if (const auto* v = std::get_if<std::vector<double>>(&first.source)) return InputShape{1, 1, v->size()};
  return InputShape{224, 224, 3};
}

std::string summarize_ids(const std::set<std::string>& ids) {
  std::string out;
  std::size_t n = 0;
  for (const auto& id : ids) {
    if (n == 8) {
      out += ", ... (" + std::to_string(ids.size()) + " total)";
      break;
    }
    out += (n++ ? ", " : "") + id;
  }
  return "{" + out + "}";
}

}  // namespace

fs::path cmd_synth(const RunConfig& config, const fs::path& out_dir, bool overwrite) {
  const fs::path manifest_path = out_dir / "manifest.txt";
  fs::create_directories(out_dir);
  if (fs::exists(manifest_path) && !overwrite)
    fail(ErrorKind::usage, "run.file_exists", "refusing to overwrite " + manifest_path.string() + " (use --overwrite)");
  save_manifest(manifest_path, synth_dataset(config.data.synth));
  return manifest_path;
}

TrainRun cmd_train(const RunConfig& config, const fs::path& run_dir, bool overwrite, std::ostream* log) {
  const DatasetManifest manifest =
      config.data.manifest ? load_manifest(*config.data.manifest) : synth_dataset(config.data.synth);
  if (manifest.count(Split::train) == 0) fail(ErrorKind::data, "data.train_split_empty", "train split empty");
  if (manifest.count(Split::val) == 0) fail(ErrorKind::data, "data.val_split_empty", "validation split empty");

  BackboneSpec spec = config.model.backbone;
  if (!config.model.input_shape_set) spec.input_shape = infer_input_shape(manifest);
  const ClassifierModel initial = build_model(spec, config.model.head_hidden, config.head_seed(), config.model.id);
  const auto train = materialize(manifest, Split::train, spec.input_shape, spec.normalization);
  const auto val = materialize(manifest, Split::val, spec.input_shape, spec.normalization);

  prepare_output_dir(run_dir, overwrite);
  RunConfig effective = config;
  effective.model.backbone = spec;
  effective.model.input_shape_set = true;
  write_text(run_dir / "config.json", dump_run_config(effective));

  TrainRun run{run_dir, fit(initial, train, val, config.train, [&](const EpochStats& s) {
                 if (log)
                   *log << "epoch " << s.epoch << "  loss " << s.train_loss << "  val_auc " << s.val_auc
                        << "  val_eer " << s.val_eer << "\n";
               })};

  std::string stats, timing;
  for (const auto& s : run.result.stats) {
    stats += Json{{"epoch", s.epoch}, {"train_loss", s.train_loss}, {"val_auc", s.val_auc}, {"val_eer", s.val_eer}}
                 .dump() + "\n";
    timing += Json{{"epoch", s.epoch}, {"wall_ms", s.wall_ms}}.dump() + "\n";
  }
  write_text(run_dir / "stats.jsonl", stats);
  write_text(run_dir / "timing.jsonl", timing);

  CheckpointMeta best_meta{{"real_class_weight", run.result.real_class_weight}};
  if (run.result.best_epoch) {
    best_meta["epoch"] = static_cast<double>(*run.result.best_epoch);
    best_meta["val_auc"] = run.result.best_val_auc;
  }
  save_checkpoint(run_dir / "best.ckpt.json", run.result.best, best_meta);
  save_checkpoint(run_dir / "final.ckpt.json", run.result.last,
                  {{"real_class_weight", run.result.real_class_weight}});
  return run;
}

ScoreSet cmd_predict(const fs::path& checkpoint, const fs::path& manifest_path, Split split, const fs::path& out) {
  const auto ckpt = load_checkpoint(checkpoint);
  const auto manifest = load_manifest(manifest_path);
  if (manifest.count(split) == 0)
    fail(ErrorKind::data, "data.split_empty", std::string(to_string(split)) + " split empty");
  const auto& spec = ckpt.model.spec();
  const auto set = materialize(manifest, split, spec.input_shape, spec.normalization);
  const auto scores = forward(ckpt.model, set.inputs);

  std::vector<ScoreEntry> entries;
  entries.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) entries.push_back({set.ids[i], scores[i]});
  ScoreSet result(ckpt.model.model_id(), std::move(entries));
  write_score_file(out, result);
  return result;
}

FusedScores cmd_fuse(std::span<const fs::path> score_files, const fs::path& out) {
  if (score_files.empty()) fail(ErrorKind::usage, "fusion.no_members", "fuse needs at least one score file");
  std::vector<ScoreSet> members;
  for (const auto& f : score_files) members.push_back(read_score_file(f));

  std::string offenders;
  for (std::size_t m = 1; m < members.size(); ++m) {
    std::set<std::string> diff;
    for (const auto& e : members[0].entries())
      if (!members[m].find(e.sample_id)) diff.insert(e.sample_id);
    for (const auto& e : members[m].entries())
      if (!members[0].find(e.sample_id)) diff.insert(e.sample_id);
    if (!diff.empty())
      offenders += (offenders.empty() ? "" : "; ") + score_files[m].string() + " vs " + score_files[0].string() +
                   " differ on " + summarize_ids(diff);
  }
  if (!offenders.empty())
    fail(ErrorKind::data, "fusion.coverage_mismatch", "score files cover different samples: " + offenders);

  auto fused = fuse(members);
  write_score_file(out, fused.scores, fused.member_ids);
  return fused;
}

EvalReport cmd_eval(const fs::path& scores_path, const fs::path& manifest_path, Split split, double threshold,
                    const std::optional<fs::path>& out) {
  std::vector<std::string> member_ids;
  const ScoreSet scores = read_score_file(scores_path, &member_ids);
  const auto manifest = load_manifest(manifest_path);
  const auto records = manifest.split(split);
  if (records.empty())
    fail(ErrorKind::data, "data.split_empty", std::string(to_string(split)) + " split empty");

  std::set<std::string> missing, extra;
  std::vector<double> values;
  std::vector<int> labels;
  for (const auto* r : records) {
    if (auto s = scores.find(r->sample_id)) {
      values.push_back(*s);
      labels.push_back(static_cast<int>(r->label));
    } else {
      missing.insert(r->sample_id);
    }
  }
  for (const auto& e : scores.entries()) {
    const auto* r = manifest.find(e.sample_id);
    if (!r || r->split != split) extra.insert(e.sample_id);
  }
  if (!missing.empty() || !extra.empty())
    fail(ErrorKind::data, "eval.coverage_mismatch",
         "score file does not cover the " + std::string(to_string(split)) + " split exactly: missing " +
             summarize_ids(missing) + ", extra " + summarize_ids(extra));

  EvalReport report = evaluate(values, labels, threshold);
  report.model_id = scores.model_id();
  report.member_ids = std::move(member_ids);
  if (out) write_text(*out, render_report(report));
  return report;
}

ProfileRecord cmd_profile(const fs::path& checkpoint, std::size_t warmup, std::size_t reps,
                          const std::optional<fs::path>& out) {
  const auto ckpt = load_checkpoint(checkpoint);
  const std::vector<double> input(ckpt.model.input_size(), 0.0);
  auto record = profile(ckpt.model, input, warmup, reps);
  if (out) write_text(*out, render_profile_record(record) + "table_row: " + render_profile_row(record) + "\n");
  return record;
}

}  // namespace dfdetect::cli

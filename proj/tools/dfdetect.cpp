// dfdetect: synthesize data, train toy detectors, score, fuse, evaluate and
// profile. Exit codes: 0 ok, 1 usage/config, 2 data error, 3 runtime error.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dfdetect/cli/commands.hpp"
#include "dfdetect/error.hpp"

namespace fs = std::filesystem;
using namespace dfdetect;

namespace {

int report_error(const std::string& code, std::string message, int exit_code) {
  std::replace(message.begin(), message.end(), '\n', ' ');
  std::cerr << "dfdetect: error: " << code << ": " << message << "\n";
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-vs-fake classifier toolkit: synth, train, predict, fuse, eval, profile"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<double> threshold;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "seed for every stochastic component (overrides config)");
  app.add_option("--out-dir", out_dir, "output directory (synth, train)");
  app.add_option("--threshold", threshold, "decision threshold for eval (overrides config)")
      ->check(CLI::Range(0.0, 1.0));

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic Gaussian manifest");
  std::optional<std::size_t> n_real, n_fake, dim;
  std::optional<double> separation, label_noise;
  bool synth_overwrite = false;
  synth->add_option("--n-real", n_real);
  synth->add_option("--n-fake", n_fake);
  synth->add_option("--dim", dim);
  synth->add_option("--separation", separation);
  synth->add_option("--label-noise", label_noise);
  synth->add_flag("--overwrite", synth_overwrite);

  // train
  auto* train = app.add_subcommand("train", "fit one model into a fresh run directory");
  std::optional<std::string> train_manifest, model_id;
  std::optional<double> lr;
  std::optional<std::size_t> epochs;
  bool train_overwrite = false, quiet = false;
  train->add_option("--manifest", train_manifest, "manifest (overrides data.manifest)");
  train->add_option("--model-id", model_id);
  train->add_option("--lr", lr);
  train->add_option("--epochs", epochs);
  train->add_flag("--overwrite", train_overwrite, "allow reusing a non-empty run directory");
  train->add_flag("--quiet", quiet);

  // predict
  auto* predict = app.add_subcommand("predict", "score one manifest split with a checkpoint");
  std::string predict_ckpt, predict_manifest, predict_split = "test", predict_out;
  predict->add_option("--checkpoint", predict_ckpt)->required();
  predict->add_option("--manifest", predict_manifest)->required();
  predict->add_option("--split", predict_split)->check(CLI::IsMember({"train", "val", "test"}));
  predict->add_option("--out", predict_out)->required();

  // fuse
  auto* fuse_cmd = app.add_subcommand("fuse", "average score files into one ensemble score file");
  std::vector<std::string> fuse_inputs;
  std::string fuse_out;
  fuse_cmd->add_option("scores", fuse_inputs, "member score files")->required();
  fuse_cmd->add_option("--out", fuse_out)->required();

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a score file against manifest labels");
  std::string eval_scores, eval_manifest;
  std::optional<std::string> eval_split, eval_out;
  eval->add_option("--scores", eval_scores)->required();
  eval->add_option("--manifest", eval_manifest)->required();
  eval->add_option("--split", eval_split)->check(CLI::IsMember({"train", "val", "test"}));
  eval->add_option("--out", eval_out, "report path (also printed to stdout)");

  // profile
  auto* profile_cmd = app.add_subcommand("profile", "parameter count, latency and size of a checkpoint");
  std::string profile_ckpt;
  std::size_t warmup = 5, reps = 50;
  std::optional<std::string> profile_out;
  profile_cmd->add_option("--checkpoint", profile_ckpt)->required();
  profile_cmd->add_option("--warmup", warmup);
  profile_cmd->add_option("--reps", reps)->check(CLI::PositiveNumber);
  profile_cmd->add_option("--out", profile_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage.invalid_arguments", e.what(), 1);
  }

  try {
    cli::RunConfig config = config_path ? cli::load_run_config(*config_path) : cli::RunConfig{};
    config.apply_seed(seed.value_or(config.seed));
    const auto opt_path = [](const std::optional<std::string>& s) -> std::optional<fs::path> {
      if (s) return fs::path(*s);
      return std::nullopt;
    };

    if (synth->parsed()) {
      auto& sc = config.data.synth;
      if (n_real) sc.n_real = *n_real;
      if (n_fake) sc.n_fake = *n_fake;
      if (dim) sc.dim = *dim;
      if (separation) sc.separation = *separation;
      if (label_noise) sc.label_noise = *label_noise;
      const auto path = cli::cmd_synth(config, out_dir.value_or("."), synth_overwrite);
      std::cout << path.string() << "\n";
    } else if (train->parsed()) {
      if (!out_dir) return report_error("usage.missing_out_dir", "train requires --out-dir", 1);
      if (train_manifest) config.data.manifest = *train_manifest;
      if (model_id) config.model.id = *model_id;
      if (lr) config.train.learning_rate = *lr;
      if (epochs) config.train.max_epochs = *epochs;
      config.train.validate();
      auto run = cli::cmd_train(config, *out_dir, train_overwrite, quiet ? nullptr : &std::cerr);
      std::cout << "best_epoch: "
                << (run.result.best_epoch ? std::to_string(*run.result.best_epoch) : std::string("none"))
                << "\nbest_val_auc: " << run.result.best_val_auc << "\n";
    } else if (predict->parsed()) {
      cli::cmd_predict(predict_ckpt, predict_manifest, parse_split(predict_split), predict_out);
    } else if (fuse_cmd->parsed()) {
      const std::vector<fs::path> inputs(fuse_inputs.begin(), fuse_inputs.end());
      cli::cmd_fuse(inputs, fuse_out);
    } else if (eval->parsed()) {
      const Split split = eval_split ? parse_split(*eval_split) : config.eval.split;
      const double t = threshold.value_or(config.eval.threshold);
      auto out = opt_path(eval_out);
      if (!out && config.eval.report) out = config.eval.report;
      std::cout << render_report(cli::cmd_eval(eval_scores, eval_manifest, split, t, out));
    } else if (profile_cmd->parsed()) {
      const auto record = cli::cmd_profile(profile_ckpt, warmup, reps, opt_path(profile_out));
      std::cout << render_profile_record(record) << "table_row: " << render_profile_row(record) << "\n";
    }
  } catch (const Error& e) {
    return report_error(e.code(), e.what(), static_cast<int>(e.kind()));
  } catch (const std::exception& e) {
    return report_error("runtime.unexpected", e.what(), 3);
  }
  return 0;
}

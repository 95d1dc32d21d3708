#include <CLI11.hpp>
#include <iostream>

#include "hypalign/commands.hpp"

namespace {

using hypalign::cli::ConfigOverrides;
using hypalign::cli::RunConfig;

struct CommonArgs {
  std::string config_path;
  ConfigOverrides overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "JSON config file (or a run manifest)")
      ->required();
  ConfigOverrides& ov = args.overrides;
  cmd->add_option("--output-dir", [&ov](const std::vector<std::string>& v) {
        ov.output_dir = v.back();
        return true;
      }, "override output directory");
  cmd->add_option("--epochs", [&ov](const std::vector<std::string>& v) {
        ov.epochs = std::stoi(v.back());
        return true;
      }, "override training epochs");
  cmd->add_option("--dim", [&ov](const std::vector<std::string>& v) {
        ov.dim = std::stoi(v.back());
        return true;
      }, "override embedding dimension");
  cmd->add_option("--layers", [&ov](const std::vector<std::string>& v) {
        ov.layers = std::stoi(v.back());
        return true;
      }, "override layer count");
  cmd->add_option("--negatives", [&ov](const std::vector<std::string>& v) {
        ov.negatives = std::stoi(v.back());
        return true;
      }, "override negatives per positive");
  cmd->add_option("--lr", [&ov](const std::vector<std::string>& v) {
        ov.learning_rate = std::stod(v.back());
        return true;
      }, "override learning rate");
  cmd->add_option("--split", [&ov](const std::vector<std::string>& v) {
        ov.split_fraction = std::stod(v.back());
        return true;
      }, "override seed alignment split fraction");
  cmd->add_option("--margin-struct", [&ov](const std::vector<std::string>& v) {
        ov.margin_struct = std::stod(v.back());
        return true;
      }, "override structure margin");
  cmd->add_option("--margin-visual", [&ov](const std::vector<std::string>& v) {
        ov.margin_visual = std::stod(v.back());
        return true;
      }, "override visual margin");
  cmd->add_option("--train-seed", [&ov](const std::vector<std::string>& v) {
        ov.train_seed = std::stoull(v.back());
        return true;
      }, "override training RNG seed");
  cmd->add_option("--data-seed", [&ov](const std::vector<std::string>& v) {
        ov.data_seed = std::stoull(v.back());
        return true;
      }, "override data RNG seed");
  cmd->add_flag("--no-visual", [&ov](int64_t count) {
        if (count > 0) ov.no_visual = true;
      }, "train and evaluate without the visual channel");
}

RunConfig resolve(const CommonArgs& args) {
  RunConfig cfg = hypalign::cli::load_config(args.config_path);
  hypalign::cli::apply_overrides(cfg, args.overrides);
  hypalign::cli::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyperbolic multi-channel entity alignment"};
  app.require_subcommand(1);

  CommonArgs train_args, eval_args, predict_args, export_args, grad_args, stats_args,
      gen_args;
  std::string eval_structure, eval_visual;
  std::string predict_structure, predict_visual;
  double predict_beta = 1.0;
  int predict_top = 10;
  std::string export_channel = "structure";
  double export_beta = 0.5;
  std::string export_out, export_structure, export_visual;
  std::string generate_out;

  CLI::App* train = app.add_subcommand("train", "train channels and write checkpoints");
  add_common(train, train_args);

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "rank test entities and write the metrics report");
  add_common(evaluate, eval_args);
  evaluate->add_option("--structure-ckpt", eval_structure, "structure checkpoint path");
  evaluate->add_option("--visual-ckpt", eval_visual, "visual checkpoint path");

  CLI::App* predict =
      app.add_subcommand("predict", "write top-k candidate lists for each test entity");
  add_common(predict, predict_args);
  predict->add_option("--beta", predict_beta, "fusion weight (1 = structure only)");
  predict->add_option("--top", predict_top, "candidates per query");
  predict->add_option("--structure-ckpt", predict_structure, "structure checkpoint path");
  predict->add_option("--visual-ckpt", predict_visual, "visual checkpoint path");

  CLI::App* exporter =
      app.add_subcommand("export-embeddings", "write embeddings for external plotting");
  add_common(exporter, export_args);
  exporter->add_option("--channel", export_channel, "structure | visual | fused")
      ->check(CLI::IsMember({"structure", "visual", "fused"}));
  exporter->add_option("--beta", export_beta, "fusion weight for --channel fused");
  exporter->add_option("--out", export_out, "output path");
  exporter->add_option("--structure-ckpt", export_structure, "structure checkpoint path");
  exporter->add_option("--visual-ckpt", export_visual, "visual checkpoint path");

  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference check of the backward pass");
  add_common(gradcheck, grad_args);

  CLI::App* stats = app.add_subcommand("stats", "dataset statistics table");
  add_common(stats, stats_args);

  CLI::App* generate = app.add_subcommand("generate", "write a synthetic dataset to files");
  add_common(generate, gen_args);
  generate->add_option("--out", generate_out, "directory for the dataset files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      hypalign::cli::cmd_train(resolve(train_args));
    } else if (evaluate->parsed()) {
      hypalign::cli::cmd_evaluate(resolve(eval_args), eval_structure, eval_visual);
    } else if (predict->parsed()) {
      hypalign::cli::cmd_predict(resolve(predict_args), predict_beta, predict_top,
                                 predict_structure, predict_visual);
    } else if (exporter->parsed()) {
      hypalign::cli::ExportChannel channel =
          export_channel == "structure" ? hypalign::cli::ExportChannel::structure
          : export_channel == "visual"  ? hypalign::cli::ExportChannel::visual
                                        : hypalign::cli::ExportChannel::fused;
      hypalign::cli::cmd_export_embeddings(resolve(export_args), channel, export_beta,
                                           export_out, export_structure, export_visual);
    } else if (gradcheck->parsed()) {
      hypalign::cli::GradCheckOutcome outcome = hypalign::cli::cmd_gradcheck(resolve(grad_args));
      return outcome.passed ? 0 : 1;
    } else if (stats->parsed()) {
      hypalign::cli::cmd_stats(resolve(stats_args));
    } else if (generate->parsed()) {
      hypalign::cli::cmd_generate(resolve(gen_args), generate_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

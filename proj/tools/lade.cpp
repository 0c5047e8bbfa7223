// lade: train an undercomplete autoencoder, estimate the latent density with
// an autoregressive mixture model, and generate new data through the decoder.
//
//   lade train-ae        --config cfg [--seed N] [--out DIR]
//   lade extract-latents --config cfg [--seed N] [--out DIR]
//   lade train-lde       --config cfg [--seed N] [--out DIR] [--latents FILE]
//   lade generate        --config cfg [--seed N] [--out DIR]
//   lade eval {parzen|nll|interp|causality} --config cfg [--seed N] [--out DIR]
//   lade plot            --config cfg --input FILE.csv [--reference FILE.csv]
//
// Commands read inputs from and write outputs to --out, so a full pipeline is
// the commands above run in order against one directory.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lade/lade.hpp"

namespace {

void add_common(CLI::App* cmd, lade::CommandArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config file")->required();
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--out", args.out, "override the config output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"autoencoder + latent density estimator pipeline"};
  app.require_subcommand(1);

  lade::CommandArgs args;
  std::string latents_path, input_csv, reference_csv;
  std::size_t interp_a = 0, interp_b = 1;

  CLI::App* train_ae = app.add_subcommand("train-ae", "train the autoencoder");
  add_common(train_ae, args);

  CLI::App* extract = app.add_subcommand("extract-latents", "encode all splits");
  add_common(extract, args);

  CLI::App* train_lde = app.add_subcommand("train-lde", "train the latent density estimator");
  add_common(train_lde, args);
  train_lde->add_option("--latents", latents_path,
                        "latent file (default: <out>/latents.ckpt, else dataset rows)");

  CLI::App* generate = app.add_subcommand("generate", "sample latents and decode");
  add_common(generate, args);

  CLI::App* eval = app.add_subcommand("eval", "evaluate a trained pipeline");
  eval->require_subcommand(1);
  CLI::App* ev_parzen = eval->add_subcommand("parzen", "Parzen window log-likelihood of test data");
  add_common(ev_parzen, args);
  CLI::App* ev_nll = eval->add_subcommand("nll", "density model NLL on test rows");
  add_common(ev_nll, args);
  CLI::App* ev_interp = eval->add_subcommand("interp", "latent interpolation likelihood curve");
  add_common(ev_interp, args);
  ev_interp->add_option("--a", interp_a, "first test row index");
  ev_interp->add_option("--b", interp_b, "second test row index");
  CLI::App* ev_caus = eval->add_subcommand("causality", "autoregressive causality check");
  add_common(ev_caus, args);

  CLI::App* plot = app.add_subcommand("plot", "render a CSV to SVG");
  add_common(plot, args);
  plot->add_option("--input", input_csv, "CSV to render")->required();
  plot->add_option("--reference", reference_csv, "reference scatter drawn beneath");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_ae->parsed()) return lade::cmd_train_ae(args);
    if (extract->parsed()) return lade::cmd_extract_latents(args);
    if (train_lde->parsed()) return lade::cmd_train_lde(args, latents_path);
    if (generate->parsed()) return lade::cmd_generate(args);
    if (eval->parsed()) {
      if (ev_parzen->parsed()) return lade::cmd_eval_parzen(args);
      if (ev_nll->parsed()) return lade::cmd_eval_nll(args);
      if (ev_interp->parsed()) return lade::cmd_eval_interp(args, interp_a, interp_b);
      if (ev_caus->parsed()) return lade::cmd_eval_causality(args);
    }
    if (plot->parsed()) return lade::cmd_plot(args, input_csv, reference_csv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

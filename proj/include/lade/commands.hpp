#pragma once

// Pipeline commands behind the CLI. Each command is a plain function so both
// the binary and the tests can drive the full flow without spawning
// processes. File names inside the output directory are fixed; callers
// compose runs by pointing successive commands at the same --out.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lade/autoencoder.hpp"
#include "lade/checkpoint.hpp"
#include "lade/checks.hpp"
#include "lade/config.hpp"
#include "lade/csv.hpp"
#include "lade/dataset.hpp"
#include "lade/errors.hpp"
#include "lade/image_io.hpp"
#include "lade/lde.hpp"
#include "lade/parzen.hpp"
#include "lade/svg.hpp"
#include "lade/train.hpp"

namespace lade {

struct CommandArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;  // overrides [run] seed when present
  std::optional<std::string> out;     // overrides [run] out when present
};

namespace detail {

inline ExperimentConfig load_config(const CommandArgs& a) {
  if (a.config_path.empty()) throw ConfigError("--config is required");
  ExperimentConfig c = ExperimentConfig::parse_file(a.config_path);
  if (a.seed) c.seed = *a.seed;
  if (a.out) c.out = *a.out;
  std::filesystem::create_directories(c.out);
  return c;
}

inline SplitDataset load_dataset(const ExperimentConfig& c) {
  switch (c.kind) {
    case DatasetKind::Toy:
      return toy_dataset(ToySpec{}, c.train_n, c.val_n, c.test_n, derive_seed(c.seed, "data"));
    case DatasetKind::Synth:
      return synth_dataset(c.train_n, c.val_n, c.test_n, derive_seed(c.seed, "data"), c.image_h,
                           c.image_w);
    case DatasetKind::Mnist:
      return mnist_load(c.path);
    case DatasetKind::PgmDir:
      return pgm_dir_load(c.path);
  }
  throw ConfigError("unreachable dataset kind");
}

inline std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

inline AeConfig ae_config_of(const ExperimentConfig& c, const SplitDataset& data) {
  AeConfig a;
  a.input_dim = data.row_dim();
  a.hidden = c.hidden;
  a.latent_dim = c.latent_dim;
  a.output_activation = c.sigmoid_output ? OutputActivation::Sigmoid : OutputActivation::Tanh;
  a.beta = c.beta;
  a.validate();
  return a;
}

inline MaskSchedule mask_schedule_of(const ExperimentConfig& c) {
  MaskSchedule s;
  s.full_dim = c.latent_dim;
  s.initial_dim = c.mask_initial_dim ? c.mask_initial_dim
                                     : std::max<std::size_t>(1, (c.latent_dim + 7) / 8);
  s.ramp_end_step = c.mask_ramp_end_step ? c.mask_ramp_end_step
                                         : std::max<std::size_t>(1, c.ae_steps / 2);
  s.total_steps = c.ae_steps;
  s.validate();
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------- train-ae

inline int cmd_train_ae(const CommandArgs& args) {
  const ExperimentConfig c = detail::load_config(args);
  const SplitDataset data = detail::load_dataset(c);
  const AeConfig ac = detail::ae_config_of(c, data);
  AeModel model = ae_init(ac, derive_seed(c.seed, "ae-init"));

  const MaskSchedule sched = detail::mask_schedule_of(c);
  const MaskSchedule* sp = c.mask_enabled ? &sched : nullptr;
  const std::vector<double> loss =
      ae_fit(model, data.train, sp, c.ae_steps, c.ae_batch, c.ae_lr, c.seed);

  save_ae(detail::join(c.out, "ae.ckpt"), model);
  csv_write_loss(detail::join(c.out, "ae_loss.csv"), loss);
  std::cout << "train-ae: " << c.ae_steps << " steps, final loss " << loss.back() << "\n"
            << "wrote " << detail::join(c.out, "ae.ckpt") << "\n";
  return 0;
}

// -------------------------------------------------------- extract-latents

inline int cmd_extract_latents(const CommandArgs& args) {
  const ExperimentConfig c = detail::load_config(args);
  const SplitDataset data = detail::load_dataset(c);
  const AeModel model = load_ae(detail::join(c.out, "ae.ckpt"));
  if (model.config.input_dim != data.row_dim())
    throw DimensionError("extract-latents: checkpoint expects input dim " +
                         std::to_string(model.config.input_dim) + ", dataset rows have " +
                         std::to_string(data.row_dim()));
  const DenseArray ztr = encode(model, data.train);
  const DenseArray zva = encode(model, data.validation);
  const DenseArray zte = encode(model, data.test);
  save_latents(detail::join(c.out, "latents.ckpt"), ztr, zva, zte);
  std::cout << "extract-latents: " << ztr.dim(0) << "/" << zva.dim(0) << "/" << zte.dim(0)
            << " rows at D=" << ztr.dim(1) << "\n"
            << "wrote " << detail::join(c.out, "latents.ckpt") << "\n";
  return 0;
}

// --------------------------------------------------------------- train-lde

// When latents_path is empty: use <out>/latents.ckpt if present, otherwise
// fit the density model directly to dataset rows (the 2-D toy experiments
// estimate the data density itself).
inline int cmd_train_lde(const CommandArgs& args, const std::string& latents_path = "") {
  const ExperimentConfig c = detail::load_config(args);

  DenseArray train({0, 0}), val({0, 0});
  std::string source;
  if (!latents_path.empty()) {
    LatentFile lf = load_latents(latents_path);
    train = std::move(lf.train);
    val = std::move(lf.val);
    source = latents_path;
  } else if (std::filesystem::exists(detail::join(c.out, "latents.ckpt"))) {
    LatentFile lf = load_latents(detail::join(c.out, "latents.ckpt"));
    train = std::move(lf.train);
    val = std::move(lf.val);
    source = detail::join(c.out, "latents.ckpt");
  } else {
    SplitDataset data = detail::load_dataset(c);
    train = std::move(data.train);
    val = std::move(data.validation);
    source = "dataset rows";
  }
  LdeConfig lc;
  lc.latent_dim = train.dim(1);
  lc.mixture_count = c.mixture_count;
  lc.filter_size = c.filter_size;
  lc.validate();

  LdeModel model = lde_init(lc, derive_seed(c.seed, "lde-init"));
  const std::vector<double> loss =
      lde_fit(model, train, c.lde_steps, c.lde_batch, c.lde_lr, c.seed);

  save_lde(detail::join(c.out, "lde.ckpt"), model);
  csv_write_loss(detail::join(c.out, "lde_loss.csv"), loss);
  const double val_nll = lde_nll_value(model, val);
  std::cout << "train-lde: D=" << lc.latent_dim << " K=" << lc.mixture_count << " on " << source
            << ", " << c.lde_steps << " steps, final loss " << loss.back()
            << ", validation loss " << val_nll << "\n"
            << "wrote " << detail::join(c.out, "lde.ckpt") << "\n";
  return 0;
}

// ---------------------------------------------------------------- generate

inline int cmd_generate(const CommandArgs& args) {
  const ExperimentConfig c = detail::load_config(args);
  const LdeModel lde = load_lde(detail::join(c.out, "lde.ckpt"));

  const DenseArray z = lde_sample(lde, c.generate_n, derive_seed(c.seed, "sample"));

  const std::string ae_path = detail::join(c.out, "ae.ckpt");
  DenseArray x = z;
  bool decoded = false;
  bool tanh_range = false;
  if (std::filesystem::exists(ae_path)) {
    const AeModel ae = load_ae(ae_path);
    if (ae.config.latent_dim != lde.config.latent_dim)
      throw DimensionError("generate: decoder expects D=" + std::to_string(ae.config.latent_dim) +
                           " but density model emits D=" +
                           std::to_string(lde.config.latent_dim));
    x = decode(ae, z);
    decoded = true;
    tanh_range = ae.config.output_activation == OutputActivation::Tanh;
  }

  std::size_t h = 0, w = 0;
  if (decoded && c.kind != DatasetKind::Toy) {
    const SplitDataset data = detail::load_dataset(c);
    if (data.is_image() && data.row_dim() == x.dim(1)) {
      h = data.image_h;
      w = data.image_w;
    }
  }
  save_samples(detail::join(c.out, "samples.ckpt"), x, h, w);

  if (x.dim(1) == 2) {
    csv_write_matrix(detail::join(c.out, "samples.csv"), {"x1", "x2"}, x);
  }
  if (h > 0) {
    // grid of the first 100 samples mapped to unit range
    const std::size_t n_show = std::min<std::size_t>(100, x.dim(0));
    DenseArray show({n_show, h * w});
    for (std::size_t i = 0; i < n_show; ++i)
      for (std::size_t j = 0; j < h * w; ++j)
        show(i, j) = tanh_range ? (x(i, j) + 1.0) / 2.0 : x(i, j);
    std::size_t gh = 0, gw = 0;
    const auto grid = image_grid(show, h, w, 10, &gh, &gw);
    pgm_write(detail::join(c.out, "samples_grid.pgm"), grid, gh, gw);
  }
  std::cout << "generate: " << x.dim(0) << " samples, dim " << x.dim(1)
            << (decoded ? " (decoded)" : " (latent space)") << "\n"
            << "wrote " << detail::join(c.out, "samples.ckpt") << "\n";
  return 0;
}

// -------------------------------------------------------------------- eval

inline int cmd_eval_parzen(const CommandArgs& args) {
  const ExperimentConfig c = detail::load_config(args);
  const SplitDataset data = detail::load_dataset(c);
  SampleFile sf = load_samples(detail::join(c.out, "samples.ckpt"));
  if (sf.samples.dim(1) != data.row_dim())
    throw DimensionError("eval parzen: sample dim " + std::to_string(sf.samples.dim(1)) +
                         " != data dim " + std::to_string(data.row_dim()));

  DenseArray val = data.validation;
  if (c.parzen_val_n && c.parzen_val_n < val.dim(0)) {
    DenseArray head({c.parzen_val_n, val.dim(1)});
    std::copy_n(val.ptr(), head.size(), head.ptr());
    val = std::move(head);
  }
  const std::vector<double> grid = log_spaced_grid(c.grid_min, c.grid_max, c.grid_points);
  const double sigma = bandwidth_grid_search(sf.samples, val, grid);
  const MeanStderr test_ll = parzen_loglik(ParzenEstimate{sf.samples, sigma}, data.test);

  std::vector<ReportRow> rows;
  rows.push_back({"parzen_sigma", sigma, 0.0, false});
  rows.push_back({"parzen_test_mean_ll", test_ll.mean, test_ll.se, true});
  csv_write_report(detail::join(c.out, "parzen_report.csv"), rows);
  std::ofstream txt(detail::join(c.out, "parzen_report.txt"));
  txt << "parzen window evaluation\n"
      << "support: " << sf.samples.dim(0) << " samples, dim " << sf.samples.dim(1) << "\n"
      << "bandwidth (validation grid search): " << sigma << "\n"
      << "test mean log-likelihood: " << test_ll.mean << " +/- " << test_ll.se << " (stderr, n="
      << test_ll.n << ")\n";
  std::cout << "eval parzen: sigma=" << sigma << ", test mean LL " << test_ll.mean << " +/- "
            << test_ll.se << "\n";
  return 0;
}

inline int cmd_eval_nll(const CommandArgs& args) {
  const ExperimentConfig c = detail::load_config(args);
  const LdeModel lde = load_lde(detail::join(c.out, "lde.ckpt"));

  DenseArray test({0, 0});
  const std::string latents_path = detail::join(c.out, "latents.ckpt");
  if (std::filesystem::exists(latents_path)) {
    test = load_latents(latents_path).test;
  } else {
    test = detail::load_dataset(c).test;
  }
  if (test.dim(1) != lde.config.latent_dim)
    throw DimensionError("eval nll: row dim " + std::to_string(test.dim(1)) + " != model dim " +
                         std::to_string(lde.config.latent_dim));
  const double nll = lde_nll_value(lde, test);
  const double mean_ll = -nll * static_cast<double>(lde.config.latent_dim);

  std::vector<ReportRow> rows;
  rows.push_back({"lde_test_nll_per_dim", nll, 0.0, false});
  rows.push_back({"lde_test_mean_ll", mean_ll, 0.0, false});
  csv_write_report(detail::join(c.out, "nll_report.csv"), rows);
  std::ofstream txt(detail::join(c.out, "nll_report.txt"));
  txt << "density model test evaluation\n"
      << "rows: " << test.dim(0) << ", dim " << lde.config.latent_dim << "\n"
      << "per-dim negative log-likelihood: " << nll << "\n"
      << "mean log-likelihood per row: " << mean_ll << "\n";
  std::cout << "eval nll: per-dim NLL " << nll << "\n";
  return 0;
}

inline int cmd_eval_interp(const CommandArgs& args, std::size_t index_a, std::size_t index_b) {
  const ExperimentConfig c = detail::load_config(args);
  const SplitDataset data = detail::load_dataset(c);
  const AeModel ae = load_ae(detail::join(c.out, "ae.ckpt"));
  const LdeModel lde = load_lde(detail::join(c.out, "lde.ckpt"));
  if (index_a >= data.test.dim(0) || index_b >= data.test.dim(0))
    throw ValueError("eval interp: test indices out of range");

  DenseArray x0({data.row_dim()}), x1({data.row_dim()});
  for (std::size_t j = 0; j < data.row_dim(); ++j) {
    x0[j] = data.test(index_a, j);
    x1[j] = data.test(index_b, j);
  }
  const std::vector<double> alphas = alpha_grid_default();
  const std::vector<double> ll = interpolation_loglik(ae, lde, x0, x1, alphas);

  DenseArray curve({alphas.size(), 2});
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    curve(i, 0) = alphas[i];
    curve(i, 1) = ll[i];
  }
  csv_write_matrix(detail::join(c.out, "interp_report.csv"), {"alpha", "log_likelihood"}, curve);
  std::ofstream txt(detail::join(c.out, "interp_report.txt"));
  txt << "latent interpolation log-likelihood\n"
      << "test rows " << index_a << " -> " << index_b << "\n";
  for (std::size_t i = 0; i < alphas.size(); ++i)
    txt << "alpha " << alphas[i] << ": " << ll[i] << "\n";
  std::cout << "eval interp: endpoints " << ll.front() << " / " << ll.back() << ", midpoint "
            << ll[ll.size() / 2] << "\n";
  return 0;
}

inline int cmd_eval_causality(const CommandArgs& args) {
  const ExperimentConfig c = detail::load_config(args);
  const LdeModel lde = load_lde(detail::join(c.out, "lde.ckpt"));
  const CausalityReport rep =
      causality_check(lde, c.causality_trials, derive_seed(c.seed, "causality"));

  std::vector<ReportRow> rows;
  rows.push_back({"causality_trials", static_cast<double>(rep.trials), 0.0, false});
  rows.push_back({"causality_pass", rep.pass ? 1.0 : 0.0, 0.0, false});
  csv_write_report(detail::join(c.out, "causality_report.csv"), rows);
  std::ofstream txt(detail::join(c.out, "causality_report.txt"));
  txt << "autoregressive causality check\n" << rep.describe() << "\n";
  std::cout << "eval causality: " << rep.describe() << "\n";
  return rep.pass ? 0 : 1;
}

// -------------------------------------------------------------------- plot

// input: a CSV written by this tool. Columns named x1,x2 → scatter
// (optionally over a reference CSV drawn beneath); otherwise the first
// column is x and each remaining column becomes a line series.
inline int cmd_plot(const CommandArgs& args, const std::string& input_csv,
                    const std::string& reference_csv = "") {
  const ExperimentConfig c = detail::load_config(args);
  std::vector<std::string> header;
  const DenseArray m = csv_read_matrix(input_csv, &header);
  const std::string out_path =
      detail::join(c.out, std::filesystem::path(input_csv).stem().string() + ".svg");

  if (header.size() == 2 && header[0] == "x1" && header[1] == "x2") {
    std::optional<DenseArray> ref;
    if (!reference_csv.empty()) ref.emplace(csv_read_matrix(reference_csv));
    svg_scatter(out_path, m, ref ? &*ref : nullptr, "samples");
  } else {
    if (header.size() < 2) throw ValueError("plot: need at least two columns");
    std::vector<double> x(m.dim(0));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = m(i, 0);
    std::vector<std::vector<double>> series(header.size() - 1, std::vector<double>(m.dim(0)));
    for (std::size_t k = 1; k < header.size(); ++k)
      for (std::size_t i = 0; i < m.dim(0); ++i) series[k - 1][i] = m(i, k);
    svg_lines(out_path, x, series,
              std::vector<std::string>(header.begin() + 1, header.end()),
              std::filesystem::path(input_csv).stem().string());
  }
  std::cout << "plot: wrote " << out_path << "\n";
  return 0;
}

}  // namespace lade

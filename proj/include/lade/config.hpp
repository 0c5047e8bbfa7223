#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lade/errors.hpp"

namespace lade {

enum class DatasetKind { Toy, Synth, Mnist, PgmDir };

// One experiment, parsed from sectioned key=value text. Unknown sections or
// keys are hard errors: a misspelled hyperparameter must not silently fall
// back to a default.
struct ExperimentConfig {
  // [dataset]
  DatasetKind kind = DatasetKind::Toy;
  std::string path;               // mnist / pgm_dir
  std::size_t train_n = 50000;    // toy / synth
  std::size_t val_n = 5000;
  std::size_t test_n = 5000;
  std::size_t image_h = 28;       // synth
  std::size_t image_w = 28;

  // [ae]
  std::vector<std::size_t> hidden = {256, 64};
  std::size_t latent_dim = 8;
  bool sigmoid_output = true;
  double beta = 0.0;

  // [mask] (0 = derive at run time: initial_dim = max(1, ceil(D/8)),
  // ramp_end_step = ae_steps / 2)
  std::size_t mask_initial_dim = 0;
  std::size_t mask_ramp_end_step = 0;
  bool mask_enabled = true;

  // [ae_train]
  std::size_t ae_steps = 4000;
  std::size_t ae_batch = 128;
  double ae_lr = 1e-3;

  // [lde]
  std::size_t mixture_count = 30;
  std::size_t filter_size = 2;

  // [lde_train]
  std::size_t lde_steps = 10000;
  std::size_t lde_batch = 128;
  double lde_lr = 2e-4;

  // [generate]
  std::size_t generate_n = 10000;

  // [eval]
  double grid_min = 0.01;
  double grid_max = 1.0;
  std::size_t grid_points = 20;
  std::size_t causality_trials = 100;
  std::size_t parzen_val_n = 0; // 0 = whole validation split

  // [run]
  std::uint64_t seed = 1;
  std::string out = "out";

  static ExperimentConfig parse_string(const std::string& text);
  static ExperimentConfig parse_file(const std::string& path);
  void validate() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

inline std::uint64_t parse_u64(const std::string& v, const std::string& where) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("junk");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + where + "' expects a non-negative integer, got '" + v + "'");
  }
}

inline double parse_real(const std::string& v, const std::string& where) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("junk");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: '" + where + "' expects a number, got '" + v + "'");
  }
}

inline std::vector<std::size_t> parse_u64_list(const std::string& v, const std::string& where) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("config: '" + where + "' has an empty list element");
    out.push_back(static_cast<std::size_t>(parse_u64(item, where)));
  }
  if (out.empty()) throw ConfigError("config: '" + where + "' expects a comma-separated list");
  return out;
}

inline bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: '" + where + "' expects a boolean, got '" + v + "'");
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::parse_string(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  bool kind_seen = false;
  static const std::set<std::string> sections = {"dataset", "ae",       "mask",  "ae_train",
                                                 "lde",     "lde_train", "generate", "eval",
                                                 "run"};
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": malformed section header");
      section = detail::trim(t.substr(1, t.size() - 2));
      if (sections.find(section) == sections.end())
        throw ConfigError("config line " + std::to_string(lineno) + ": unknown section [" +
                          section + "]");
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": key outside any section");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string val = detail::trim(t.substr(eq + 1));
    const std::string where = section + "." + key;
    auto u = [&] { return static_cast<std::size_t>(detail::parse_u64(val, where)); };
    auto r = [&] { return detail::parse_real(val, where); };

    bool known = true;
    if (section == "dataset") {
      if (key == "kind") {
        if (val == "toy") c.kind = DatasetKind::Toy;
        else if (val == "synth") c.kind = DatasetKind::Synth;
        else if (val == "mnist") c.kind = DatasetKind::Mnist;
        else if (val == "pgm_dir") c.kind = DatasetKind::PgmDir;
        else throw ConfigError("config: dataset.kind must be toy|synth|mnist|pgm_dir, got '" + val + "'");
        kind_seen = true;
      } else if (key == "path") c.path = val;
      else if (key == "train_n") c.train_n = u();
      else if (key == "val_n") c.val_n = u();
      else if (key == "test_n") c.test_n = u();
      else if (key == "image_h") c.image_h = u();
      else if (key == "image_w") c.image_w = u();
      else known = false;
    } else if (section == "ae") {
      if (key == "hidden") c.hidden = detail::parse_u64_list(val, where);
      else if (key == "latent_dim") c.latent_dim = u();
      else if (key == "output_activation") {
        if (val == "sigmoid") c.sigmoid_output = true;
        else if (val == "tanh") c.sigmoid_output = false;
        else throw ConfigError("config: ae.output_activation must be tanh|sigmoid");
      } else if (key == "beta") c.beta = r();
      else known = false;
    } else if (section == "mask") {
      if (key == "initial_dim") c.mask_initial_dim = u();
      else if (key == "ramp_end_step") c.mask_ramp_end_step = u();
      else if (key == "enabled") c.mask_enabled = detail::parse_bool(val, where);
      else known = false;
    } else if (section == "ae_train") {
      if (key == "steps") c.ae_steps = u();
      else if (key == "batch_size") c.ae_batch = u();
      else if (key == "lr") c.ae_lr = r();
      else known = false;
    } else if (section == "lde") {
      if (key == "mixture_count") c.mixture_count = u();
      else if (key == "filter_size") c.filter_size = u();
      else known = false;
    } else if (section == "lde_train") {
      if (key == "steps") c.lde_steps = u();
      else if (key == "batch_size") c.lde_batch = u();
      else if (key == "lr") c.lde_lr = r();
      else known = false;
    } else if (section == "generate") {
      if (key == "n") c.generate_n = u();
      else known = false;
    } else if (section == "eval") {
      if (key == "grid_min") c.grid_min = r();
      else if (key == "grid_max") c.grid_max = r();
      else if (key == "grid_points") c.grid_points = u();
      else if (key == "causality_trials") c.causality_trials = u();
      else if (key == "parzen_val_n") c.parzen_val_n = u();
      else known = false;
    } else if (section == "run") {
      if (key == "seed") c.seed = detail::parse_u64(val, where);
      else if (key == "out") c.out = val;
      else known = false;
    }
    if (!known)
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key +
                        "' in section [" + section + "]");
  }
  if (!kind_seen) throw ConfigError("config: dataset.kind is required");
  c.validate();
  return c;
}

inline ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_string(ss.str());
}

inline void ExperimentConfig::validate() const {
  if ((kind == DatasetKind::Mnist || kind == DatasetKind::PgmDir)) {
    if (path.empty()) throw ConfigError("config: dataset.path is required for this dataset kind");
    if (!std::filesystem::exists(path))
      throw ConfigError("config: dataset.path does not exist: " + path);
  }
  if (kind == DatasetKind::Toy || kind == DatasetKind::Synth) {
    if (train_n < 1 || val_n < 1 || test_n < 1)
      throw ConfigError("config: dataset split sizes must be >= 1");
  }
  if (kind == DatasetKind::Synth && (image_h < 4 || image_w < 4))
    throw ConfigError("config: synth images must be at least 4x4");
  if (ae_steps < 1 || lde_steps < 1) throw ConfigError("config: step counts must be >= 1");
  if (ae_batch < 1 || lde_batch < 1) throw ConfigError("config: batch sizes must be >= 1");
  if (!(ae_lr > 0.0) || !(lde_lr > 0.0)) throw ConfigError("config: learning rates must be > 0");
  if (mixture_count < 1) throw ConfigError("config: lde.mixture_count must be >= 1");
  if (filter_size < 2) throw ConfigError("config: lde.filter_size must be >= 2");
  if (generate_n < 1) throw ConfigError("config: generate.n must be >= 1");
  if (!(grid_min > 0.0) || !(grid_max > grid_min))
    throw ConfigError("config: eval grid needs 0 < grid_min < grid_max");
  if (grid_points < 2) throw ConfigError("config: eval.grid_points must be >= 2");
  if (causality_trials < 1) throw ConfigError("config: eval.causality_trials must be >= 1");
  if (out.empty()) throw ConfigError("config: run.out must be nonempty");
}

}  // namespace lade

// irsec: dataset generation, training and the evaluation sweeps.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "irsec/errors.hpp"
#include "irsec/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> realizations;
  std::optional<std::uint64_t> mc_draws;
  std::optional<std::string> checkpoint;
  std::optional<std::string> dataset;
  std::optional<std::string> methods;
  std::optional<std::string> grid;
  std::optional<int> threads;
  std::optional<int> epochs;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value config file");
  cmd->add_option("--seed", f.seed, "root seed");
  cmd->add_option("--out", f.out, "output path");
  cmd->add_option("--realizations", f.realizations, "channel realizations per grid point");
  cmd->add_option("--mc-draws", f.mc_draws, "Monte Carlo draws per realization");
  cmd->add_option("--checkpoint", f.checkpoint, "checkpoint path; {ns}, {snr}, {rs} are substituted");
  cmd->add_option("--dataset", f.dataset, "dataset path");
  cmd->add_option("--methods", f.methods, "comma list of no_irs, random_phase, ao, neural");
  cmd->add_option("--grid", f.grid, "comma list of grid values");
  cmd->add_option("--threads", f.threads, "worker threads, 0 = all cores");
  cmd->add_option("--epochs", f.epochs, "maximum training epochs");
}

std::string join_grid(const std::vector<double>& g) {
  std::ostringstream o;
  for (std::size_t i = 0; i < g.size(); ++i) o << (i ? "," : "") << g[i];
  return o.str();
}

// Applies command-line overrides by round-tripping through the config text so
// every value goes through the same parser and validation.
irsec::ExperimentConfig build_config(const CommonFlags& f, std::optional<irsec::SweepVar> var) {
  irsec::ExperimentConfig base = f.config.empty() ? irsec::ExperimentConfig{} : irsec::ExperimentConfig::load(f.config);
  if (var && base.sweep_var != *var) {
    base.sweep_var = *var;
    switch (*var) {
      case irsec::SweepVar::kNs: base.grid = {16, 24, 32, 40, 48}; break;
      case irsec::SweepVar::kSnr: base.grid = {0, 5, 10, 15, 20}; break;
      case irsec::SweepVar::kRs: base.grid = {2.0, 2.5, 3.0, 3.5, 4.0, 4.5}; break;
    }
  }
  std::string text = base.emit();
  std::string extra;
  auto set = [&extra](const std::string& key, const std::string& value) { extra += key + " = " + value + "\n"; };
  if (f.seed) set("seeds.root", std::to_string(*f.seed));
  if (f.out) set("paths.out", *f.out);
  if (f.realizations) set("sweep.realizations", std::to_string(*f.realizations));
  if (f.mc_draws) set("sweep.mc_draws", std::to_string(*f.mc_draws));
  if (f.checkpoint) set("paths.checkpoint", *f.checkpoint);
  if (f.dataset) set("paths.dataset", *f.dataset);
  if (f.methods) set("sweep.methods", *f.methods);
  if (f.grid) set("sweep.grid", *f.grid);
  if (f.threads) set("sweep.threads", std::to_string(*f.threads));
  if (f.epochs) set("train.max_epochs", std::to_string(*f.epochs));

  // Drop the emitted lines that are overridden, then append the overrides.
  std::istringstream in(text);
  std::string line, kept;
  while (std::getline(in, line)) {
    const std::string key = line.substr(0, line.find(' '));
    if (extra.find(key + " = ") == std::string::npos) kept += line + "\n";
  }
  return irsec::ExperimentConfig::parse(kept + extra);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IRS-assisted wiretap precoder and phase design"};
  app.require_subcommand(1);

  CommonFlags f;
  auto* gen = app.add_subcommand("gen-data", "generate a training/validation dataset");
  auto* trn = app.add_subcommand("train", "train the phase network on a dataset");
  auto* sns = app.add_subcommand("sweep-ns", "outage versus number of IRS elements");
  auto* ssnr = app.add_subcommand("sweep-snr", "outage versus SNR");
  auto* srs = app.add_subcommand("sweep-rs", "outage versus target secrecy rate");
  auto* bench = app.add_subcommand("bench-time", "per-solve wall-clock time");
  auto* vmc = app.add_subcommand("validate-mc", "closed-form outage against Monte Carlo");
  for (auto* cmd : {gen, trn, sns, ssnr, srs, bench, vmc}) add_common(cmd, f);
  bool print_config = false;
  app.add_flag("--print-config", print_config, "print the effective config before running");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*vmc && !f.mc_draws) f.mc_draws = 100000;
    std::optional<irsec::SweepVar> var;
    if (*sns) var = irsec::SweepVar::kNs;
    if (*ssnr) var = irsec::SweepVar::kSnr;
    if (*srs) var = irsec::SweepVar::kRs;
    const irsec::ExperimentConfig cfg = build_config(f, var);
    if (print_config) std::cerr << cfg.emit();

    if (*gen) {
      irsec::cmd_gen_data(cfg);
      std::printf("wrote %d samples to %s\n", cfg.train.train_size + cfg.train.val_size, cfg.dataset_path.c_str());
    } else if (*trn) {
      const auto s = irsec::cmd_train(cfg);
      std::printf("epochs %d, initial val loss %.6g, best val loss %.6g (epoch %d)\n", s.result.epochs_run,
                  s.result.initial_val_loss, s.result.best_val_loss, s.result.best_epoch);
      std::printf("wrote %s\n", s.checkpoint.string().c_str());
    } else if (*sns || *ssnr || *srs) {
      irsec::cmd_sweep(cfg);
      std::printf("%s sweep over [%s] written to %s\n", std::string(irsec::sweep_var_name(cfg.sweep_var)).c_str(),
                  join_grid(cfg.grid).c_str(), cfg.out_path.c_str());
    } else if (*bench) {
      irsec::cmd_bench_time(cfg);
      std::printf("timing written to %s\n", cfg.out_path.c_str());
    } else if (*vmc) {
      const bool ok = irsec::cmd_validate_mc(cfg);
      std::printf("%s (%s)\n", ok ? "PASS" : "FAIL", cfg.out_path.c_str());
      return ok ? 0 : 1;
    }
  } catch (const irsec::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

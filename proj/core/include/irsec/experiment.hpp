#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "irsec/ao.hpp"
#include "irsec/beamform.hpp"
#include "irsec/channel.hpp"
#include "irsec/neuralphase.hpp"

namespace irsec {

enum class SweepVar { kNs, kSnr, kRs };

std::string_view sweep_var_name(SweepVar v);
SweepVar parse_sweep_var(std::string_view name);

// Everything one CLI run needs. Stored as flat "key = value" text, one key
// per line, '#' starts a comment. Keys:
//   system.n_t system.n_r system.n_e system.n_s system.snr_db system.r_s
//   system.sigma2 system.sigma2_e
//   sweep.var (ns|snr|rs) sweep.grid (comma list) sweep.methods (comma list)
//   sweep.realizations sweep.mc_draws sweep.threads
//   train.train_size train.val_size train.max_epochs train.batch_size
//   train.initial_lr train.plateau_decay_factor train.plateau_patience
//   train.early_stop_patience train.arch (desk|reference) train.layout
//   train.batch_norm
//   seeds.root seeds.train
//   ao.max_outer_iters ao.grad_steps_per_outer ao.step_size ao.step_decay
//   ao.tol_objective ao.restarts
//   paths.dataset paths.checkpoint paths.out
// paths.checkpoint may contain {ns}, {snr} and {rs}, replaced per grid point.
struct ExperimentConfig {
  int n_t = 4;
  int n_r = 2;
  int n_e = 2;
  int n_s = 48;
  double snr_db = 10.0;
  double r_s = 3.5;
  double sigma2 = 1.0;
  double sigma2_e = 1.0;

  SweepVar sweep_var = SweepVar::kNs;
  std::vector<double> grid{16, 24, 32, 40, 48};
  std::vector<Method> methods{Method::kMrtNoIrs, Method::kRandomPhase, Method::kAo};
  int realizations = 200;
  std::uint64_t mc_draws = 1000;
  int threads = 0;  // 0 = hardware concurrency

  TrainConfig train;
  std::string arch = "desk";
  InputLayout layout = InputLayout::kChannelStack;
  bool batch_norm = true;

  std::uint64_t seed = 1;
  AoConfig ao;

  std::string dataset_path = "dataset.irsd";
  std::string checkpoint_path = "model_ns{ns}.irsn";
  std::string out_path = "out.csv";

  // System parameters at the base setting with placeholder large-scale
  // fading; grid points and realizations override fields as needed.
  SystemParams system() const;
  NetArch net_arch(int n_s) const;
  std::string checkpoint_for(int n_s, double snr_db, double r_s) const;

  void validate() const;  // ConfigError
  std::string emit() const;
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);

  bool operator==(const ExperimentConfig&) const = default;
};

// Dataset for training: train_size + val_size samples at the base setting,
// with large-scale fading drawn per sample. Written as one IRSD file plus a
// "<path>.meta.json" sidecar with seed, generator and counts.
std::vector<DatasetSample> generate_dataset(const ExperimentConfig& cfg, std::uint64_t count);
void cmd_gen_data(const ExperimentConfig& cfg);

struct TrainSummary {
  std::filesystem::path checkpoint;
  std::filesystem::path metadata;
  std::filesystem::path curve;
  TrainResult result;
};
// Reads paths.dataset, trains, writes the checkpoint, "<ckpt>.json" metadata
// and "<ckpt>.curve.csv".
TrainSummary cmd_train(const ExperimentConfig& cfg);

struct SweepRow {
  double grid_value = 0.0;
  Method method = Method::kMrtNoIrs;
  double mean_p_out_closed = 0.0;
  double mean_p_out_mc = 0.0;
  double stderr_mc = 0.0;  // standard error of the mean MC estimate
  double mean_objective = 0.0;
  int realizations = 0;
  std::uint64_t seed = 0;
};

// One instance of the sweep: realization `index` at a given setting. The same
// index gives the same H_b, large-scale fading and method seeds at every
// grid point, so methods and grid points share random numbers.
struct SweepInstance {
  ChannelRealization channels;
  SystemParams params;
  std::uint64_t random_phase_seed = 0;
  std::uint64_t ao_seed = 0;
  std::uint64_t mc_seed = 0;
};
SweepInstance sweep_instance(const ExperimentConfig& cfg, const SystemParams& setting, int index);

// SystemParams for one grid point.
SystemParams grid_setting(const ExperimentConfig& cfg, double grid_value);

// Runs every method at every grid point. Neural models are loaded from
// checkpoint_for(...); a missing file is a ConfigError. `models` may supply
// already loaded models keyed by checkpoint path.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg,
                                const std::map<std::string, PhaseNet>& models = {});
std::string sweep_csv(const std::vector<SweepRow>& rows);
void cmd_sweep(const ExperimentConfig& cfg);

struct TimingRow {
  Method method = Method::kAo;
  int n_s = 0;
  double total_seconds = 0.0;
  double per_solve_seconds = 0.0;
};
// Wall-clock time of `solves` consecutive single-threaded solves per method
// and N_s; one extra warm-up solve per point is not timed.
std::vector<TimingRow> run_bench_time(const ExperimentConfig& cfg, int solves = 20,
                                      const std::map<std::string, PhaseNet>& models = {});
std::string timing_csv(const std::vector<TimingRow>& rows);
void cmd_bench_time(const ExperimentConfig& cfg);

struct McCheckRow {
  int config = 0;
  int n_e = 0;
  int n_s = 0;
  double beta_d = 0.0;
  double beta_r = 0.0;
  double r_s = 0.0;
  double p_closed = 0.0;
  double p_mc = 0.0;
  double stderr_mc = 0.0;
  double ratio = 0.0;  // |p_mc - p_closed| / (3 sqrt(p_closed (1 - p_closed) / draws))
  std::uint64_t seed = 0;
};
// Random configurations cycling N_e over {1, 2, 4} and N_s over {8, 16, 32}
// with random phases, beams and fading; the first has beta_r = 0, N_e = 1.
std::vector<McCheckRow> run_validate_mc(const ExperimentConfig& cfg, int configs = 20);
std::string validate_mc_csv(const std::vector<McCheckRow>& rows);
bool validate_mc_passed(const std::vector<McCheckRow>& rows);
// Returns whether every ratio is <= 1.
bool cmd_validate_mc(const ExperimentConfig& cfg);

}  // namespace irsec

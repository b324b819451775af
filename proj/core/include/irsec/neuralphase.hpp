#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "irsec/beamform.hpp"
#include "irsec/channel.hpp"
#include "irsec/secrecy.hpp"

namespace irsec {

// How the complex stack [H_b; F_1; ...; F_{N_s}] is expanded into real planes.
//   kChannelStack: N_r x N_t x 3(N_s+1), channels = Re planes, Im planes, Abs planes
//   kRowStack:     3N_r x N_t x (N_s+1), rows = Re rows, Im rows, Abs rows
enum class InputLayout { kChannelStack, kRowStack };

std::string_view layout_name(InputLayout layout);
InputLayout parse_layout(std::string_view name);  // ConfigError on unknown names

// Real tensor in channel-major (C, H, W) order.
struct NetInput {
  InputLayout layout = InputLayout::kChannelStack;
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  double at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
};

NetInput preprocess(const ChannelRealization& real, InputLayout layout);

struct ConvSpec {
  int filters = 0;
  int kernel = 2;
  bool operator==(const ConvSpec&) const = default;
};

struct NetArch {
  int n_t = 4;
  int n_r = 2;
  int n_s = 16;
  InputLayout layout = InputLayout::kChannelStack;
  std::vector<ConvSpec> conv;
  std::vector<int> fc;  // last width must equal n_s
  bool batch_norm = true;
  std::string hidden_activation = "relu";
  std::string output_activation = "sigmoid";

  // 16@2x2, 32@2x2, FC 8N_s / 4N_s / N_s.
  static NetArch desk_scale(int n_t, int n_r, int n_s, InputLayout layout = InputLayout::kChannelStack);
  // 256@2x2, 512@2x2, FC 64N_s / 16N_s / N_s.
  static NetArch reference(int n_t, int n_r, int n_s, InputLayout layout = InputLayout::kChannelStack);

  // Shape of the expected input tensor.
  int input_channels() const;
  int input_height() const;
  int input_width() const;

  void validate() const;  // ConfigError
  std::string to_json() const;
  static NetArch from_json(const std::string& text);

  bool operator==(const NetArch&) const = default;
};

struct TrainConfig {
  int train_size = 8000;
  int val_size = 2000;
  int max_epochs = 100;
  int batch_size = 256;
  double initial_lr = 0.01;
  double plateau_decay_factor = 0.3;
  int plateau_patience = 15;
  int early_stop_patience = 20;
  std::uint64_t rng_seed = 1;

  // Values used in the original large-scale training run.
  static TrainConfig reference();

  void validate() const;  // ConfigError
  std::string to_json() const;
  static TrainConfig from_json(const std::string& text);

  bool operator==(const TrainConfig&) const = default;
};

// Reduce-on-plateau learning rate schedule with early stopping. After each
// epoch, `step(val_loss)` is called:
//   - an improvement (val < best) resets both counters;
//   - otherwise the plateau counter grows, and when it reaches
//     plateau_patience the rate is multiplied by the decay factor and the
//     plateau counter restarts;
//   - training stops once early_stop_patience epochs pass without improvement.
class PlateauScheduler {
 public:
  PlateauScheduler(double initial_lr, double decay_factor, int plateau_patience, int early_stop_patience);

  // Returns true when training should stop.
  bool step(double val_loss);

  double lr() const noexcept { return lr_; }
  double best() const noexcept { return best_; }
  int epochs_since_improvement() const noexcept { return since_best_; }

 private:
  double lr_;
  double factor_;
  int plateau_patience_;
  int early_stop_patience_;
  double best_;
  int since_best_ = 0;
  int plateau_count_ = 0;
};

// Phase predictor. Inference (`forward`) is const and keeps no state, so a
// model can be shared between threads once training is finished.
class PhaseNet {
 public:
  PhaseNet(NetArch arch, std::uint64_t seed);
  ~PhaseNet();
  PhaseNet(const PhaseNet& other);
  PhaseNet& operator=(const PhaseNet& other);
  PhaseNet(PhaseNet&&) noexcept;
  PhaseNet& operator=(PhaseNet&&) noexcept;

  const NetArch& arch() const noexcept;
  std::uint64_t seed() const noexcept;

  // z in (0, 1)^{N_s}; ConfigError when the input shape does not match.
  std::vector<double> forward(const NetInput& input) const;
  std::vector<std::vector<double>> forward_batch(std::span<const NetInput> inputs) const;

  // Flat view over all trainable parameters, in a fixed order.
  std::size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> values);

  // Training-mode loss (batch statistics in normalization layers) and its
  // gradient with respect to parameters(), with the beam held fixed.
  // Running statistics of normalization layers are updated as a side effect.
  struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> gradient;
  };
  LossAndGradient loss_and_gradient(std::span<const DatasetSample> batch);

  // Training metadata stored alongside the weights.
  int epoch = 0;
  double best_val_loss = 0.0;

  // Binary checkpoint: "IRSN" | u32 version | u64 json length | arch json |
  // u64 seed | i32 epoch | f64 best val loss | u64 tensor count |
  // per tensor u64 rows, u64 cols, f64 entries (column-major).
  void save(const std::filesystem::path& path) const;
  static PhaseNet load(const std::filesystem::path& path);
  std::vector<std::uint8_t> serialize() const;
  static PhaseNet deserialize(std::span<const std::uint8_t> bytes);

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
  friend class Trainer;
};

// theta = 2 pi z; DomainError unless every z is in (0, 1).
PhaseConfig theta_from_z(std::span<const double> z);

// -mean over the batch of the objective at theta = 2 pi forward(x) and the
// closed-form beam for those phases. Inference mode.
double loss_batch(std::span<const DatasetSample> batch, const PhaseNet& model);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  PhaseNet model;  // weights of the best validation epoch
  std::vector<EpochRecord> curve;
  double initial_val_loss = 0.0;  // before any update
  double best_val_loss = 0.0;
  int best_epoch = 0;
  int epochs_run = 0;
  bool early_stopped = false;
};

// The first cfg.train_size samples are used for training and the next
// cfg.val_size for validation. TrainingError on a non-finite loss.
TrainResult train(std::span<const DatasetSample> dataset, const NetArch& arch, const TrainConfig& cfg);

// JSON sidecar describing a checkpoint.
std::string checkpoint_metadata_json(const NetArch& arch, const TrainConfig& cfg, std::uint64_t dataset_hash,
                                     double best_val_loss, int epochs_run);

Solution infer_solution(const PhaseNet& model, const ChannelRealization& real, const SystemParams& params);

}  // namespace irsec

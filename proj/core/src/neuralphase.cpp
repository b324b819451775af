#include "irsec/neuralphase.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <numeric>

#include "json.hpp"

#include "irsec/ao.hpp"
#include "irsec/errors.hpp"
#include "irsec/random.hpp"
#include "layers.hpp"

namespace irsec {

using nlohmann::json;
using nn::Mat;

// ---------------------------------------------------------------- input

std::string_view layout_name(InputLayout layout) {
  switch (layout) {
    case InputLayout::kChannelStack: return "channel_stack";
    case InputLayout::kRowStack: return "row_stack";
  }
  throw ConfigError("unknown input layout");
}

InputLayout parse_layout(std::string_view name) {
  if (name == "channel_stack") return InputLayout::kChannelStack;
  if (name == "row_stack") return InputLayout::kRowStack;
  throw ConfigError("unknown input layout '" + std::string(name) + "'");
}

NetInput preprocess(const ChannelRealization& real, InputLayout layout) {
  real.validate();
  const int n_r = static_cast<int>(real.n_r());
  const int n_t = static_cast<int>(real.n_t());
  const int planes = static_cast<int>(real.n_s()) + 1;

  // entry (p, r, t) of the complex stack: p = 0 is H_b, p = n is F_n
  auto entry = [&](int p, int r, int t) -> cplx {
    if (p == 0) return real.h_b(r, t);
    return real.g_r(r, p - 1) * real.h(p - 1, t);
  };

  NetInput in;
  in.layout = layout;
  in.width = n_t;
  switch (layout) {
    case InputLayout::kChannelStack:
      in.channels = 3 * planes;
      in.height = n_r;
      break;
    case InputLayout::kRowStack:
      in.channels = planes;
      in.height = 3 * n_r;
      break;
    default:
      throw ConfigError("unknown input layout");
  }
  in.data.assign(static_cast<std::size_t>(in.channels) * in.height * in.width, 0.0);
  auto put = [&](int c, int y, int x, double v) {
    in.data[(static_cast<std::size_t>(c) * in.height + y) * in.width + x] = v;
  };

  for (int p = 0; p < planes; ++p)
    for (int r = 0; r < n_r; ++r)
      for (int t = 0; t < n_t; ++t) {
        const cplx z = entry(p, r, t);
        const double parts[3] = {z.real(), z.imag(), std::abs(z)};
        for (int k = 0; k < 3; ++k) {
          if (layout == InputLayout::kChannelStack) {
            put(k * planes + p, r, t, parts[k]);
          } else {
            put(p, k * n_r + r, t, parts[k]);
          }
        }
      }
  return in;
}

// ---------------------------------------------------------------- NetArch

NetArch NetArch::desk_scale(int n_t, int n_r, int n_s, InputLayout layout) {
  NetArch a;
  a.n_t = n_t;
  a.n_r = n_r;
  a.n_s = n_s;
  a.layout = layout;
  a.conv = {{16, 2}, {32, 2}};
  a.fc = {8 * n_s, 4 * n_s, n_s};
  return a;
}

NetArch NetArch::reference(int n_t, int n_r, int n_s, InputLayout layout) {
  NetArch a;
  a.n_t = n_t;
  a.n_r = n_r;
  a.n_s = n_s;
  a.layout = layout;
  a.conv = {{256, 2}, {512, 2}};
  a.fc = {64 * n_s, 16 * n_s, n_s};
  return a;
}

int NetArch::input_channels() const { return layout == InputLayout::kChannelStack ? 3 * (n_s + 1) : n_s + 1; }
int NetArch::input_height() const { return layout == InputLayout::kChannelStack ? n_r : 3 * n_r; }
int NetArch::input_width() const { return n_t; }

void NetArch::validate() const {
  if (n_t < 1 || n_r < 1 || n_s < 1) throw ConfigError("NetArch: n_t, n_r, n_s must be >= 1");
  for (const auto& c : conv) {
    if (c.filters < 1 || c.kernel < 1) throw ConfigError("NetArch: conv filters and kernel must be >= 1");
  }
  if (fc.empty() || fc.back() != n_s) throw ConfigError("NetArch: last fully-connected width must equal n_s");
  for (int w : fc) {
    if (w < 1) throw ConfigError("NetArch: fully-connected widths must be >= 1");
  }
  if (hidden_activation != "relu" && hidden_activation != "sigmoid") {
    throw ConfigError("NetArch: unknown hidden activation '" + hidden_activation + "'");
  }
  if (output_activation != "sigmoid") {
    throw ConfigError("NetArch: output activation must map to (0, 1); only 'sigmoid' is supported");
  }
}

std::string NetArch::to_json() const {
  json j;
  j["n_t"] = n_t;
  j["n_r"] = n_r;
  j["n_s"] = n_s;
  j["layout"] = std::string(layout_name(layout));
  j["conv"] = json::array();
  for (const auto& c : conv) j["conv"].push_back({{"filters", c.filters}, {"kernel", c.kernel}});
  j["fc"] = fc;
  j["batch_norm"] = batch_norm;
  j["hidden_activation"] = hidden_activation;
  j["output_activation"] = output_activation;
  return j.dump();
}

NetArch NetArch::from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    NetArch a;
    a.n_t = j.at("n_t").get<int>();
    a.n_r = j.at("n_r").get<int>();
    a.n_s = j.at("n_s").get<int>();
    a.layout = parse_layout(j.at("layout").get<std::string>());
    a.conv.clear();
    for (const auto& c : j.at("conv")) a.conv.push_back({c.at("filters").get<int>(), c.at("kernel").get<int>()});
    a.fc = j.at("fc").get<std::vector<int>>();
    a.batch_norm = j.at("batch_norm").get<bool>();
    a.hidden_activation = j.at("hidden_activation").get<std::string>();
    a.output_activation = j.at("output_activation").get<std::string>();
    a.validate();
    return a;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("NetArch json: ") + e.what());
  }
}

// ---------------------------------------------------------------- TrainConfig

TrainConfig TrainConfig::reference() {
  TrainConfig c;
  c.train_size = 800000;
  c.val_size = 200000;
  c.max_epochs = 2000;
  c.batch_size = 1000;
  return c;
}

void TrainConfig::validate() const {
  if (train_size < 1) throw ConfigError("TrainConfig: train_size must be >= 1");
  if (val_size < 1) throw ConfigError("TrainConfig: val_size must be >= 1");
  if (max_epochs < 1) throw ConfigError("TrainConfig: max_epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
  if (!(initial_lr > 0.0) || !std::isfinite(initial_lr)) throw ConfigError("TrainConfig: initial_lr must be > 0");
  if (!(plateau_decay_factor > 0.0 && plateau_decay_factor < 1.0)) {
    throw ConfigError("TrainConfig: plateau_decay_factor must be in (0, 1)");
  }
  if (plateau_patience < 1 || early_stop_patience < 1) throw ConfigError("TrainConfig: patience must be >= 1");
}

std::string TrainConfig::to_json() const {
  json j;
  j["train_size"] = train_size;
  j["val_size"] = val_size;
  j["max_epochs"] = max_epochs;
  j["batch_size"] = batch_size;
  j["initial_lr"] = initial_lr;
  j["plateau_decay_factor"] = plateau_decay_factor;
  j["plateau_patience"] = plateau_patience;
  j["early_stop_patience"] = early_stop_patience;
  j["rng_seed"] = rng_seed;
  return j.dump();
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    TrainConfig c;
    c.train_size = j.at("train_size").get<int>();
    c.val_size = j.at("val_size").get<int>();
    c.max_epochs = j.at("max_epochs").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.initial_lr = j.at("initial_lr").get<double>();
    c.plateau_decay_factor = j.at("plateau_decay_factor").get<double>();
    c.plateau_patience = j.at("plateau_patience").get<int>();
    c.early_stop_patience = j.at("early_stop_patience").get<int>();
    c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("TrainConfig json: ") + e.what());
  }
}

// ---------------------------------------------------------------- scheduler

PlateauScheduler::PlateauScheduler(double initial_lr, double decay_factor, int plateau_patience,
                                   int early_stop_patience)
    : lr_(initial_lr),
      factor_(decay_factor),
      plateau_patience_(plateau_patience),
      early_stop_patience_(early_stop_patience),
      best_(std::numeric_limits<double>::infinity()) {
  if (!(decay_factor > 0.0 && decay_factor < 1.0)) throw ConfigError("PlateauScheduler: factor must be in (0, 1)");
  if (plateau_patience < 1 || early_stop_patience < 1) throw ConfigError("PlateauScheduler: patience must be >= 1");
}

bool PlateauScheduler::step(double val_loss) {
  if (val_loss < best_) {
    best_ = val_loss;
    since_best_ = 0;
    plateau_count_ = 0;
    return false;
  }
  ++since_best_;
  if (++plateau_count_ >= plateau_patience_) {
    lr_ *= factor_;
    plateau_count_ = 0;
  }
  return since_best_ >= early_stop_patience_;
}

// ---------------------------------------------------------------- PhaseNet

struct PhaseNet::Impl {
  NetArch arch;
  std::uint64_t seed = 0;
  std::vector<std::unique_ptr<nn::Layer>> layers;

  Impl(NetArch a, std::uint64_t s) : arch(std::move(a)), seed(s) {
    arch.validate();
    std::uint64_t counter = 0;
    auto next_seed = [&] { return derive_seed(seed, counter++); };
    auto activation = [&]() -> std::unique_ptr<nn::Layer> {
      if (arch.hidden_activation == "relu") return std::make_unique<nn::Relu>();
      return std::make_unique<nn::Sigmoid>();
    };

    const int h = arch.input_height();
    const int w = arch.input_width();
    int channels = arch.input_channels();
    for (const auto& c : arch.conv) {
      layers.push_back(std::make_unique<nn::Conv2d>(channels, c.filters, c.kernel, h, w, next_seed()));
      if (arch.batch_norm) layers.push_back(std::make_unique<nn::BatchNorm>(c.filters));
      layers.push_back(activation());
      channels = c.filters;
    }
    layers.push_back(std::make_unique<nn::Flatten>(channels, h * w));
    int features = channels * h * w;
    for (std::size_t i = 0; i < arch.fc.size(); ++i) {
      layers.push_back(std::make_unique<nn::Linear>(features, arch.fc[i], next_seed()));
      features = arch.fc[i];
      if (i + 1 < arch.fc.size()) {
        if (arch.batch_norm) layers.push_back(std::make_unique<nn::BatchNorm>(features));
        layers.push_back(activation());
      }
    }
    layers.push_back(std::make_unique<nn::Sigmoid>());
  }

  Impl(const Impl& other) : arch(other.arch), seed(other.seed) {
    for (const auto& l : other.layers) layers.push_back(l->clone());
  }

  Mat to_matrix(std::span<const NetInput> inputs) const {
    const int c = arch.input_channels();
    const int h = arch.input_height();
    const int w = arch.input_width();
    const Eigen::Index hw = static_cast<Eigen::Index>(h) * w;
    Mat x(c, hw * static_cast<Eigen::Index>(inputs.size()));
    for (std::size_t b = 0; b < inputs.size(); ++b) {
      const NetInput& in = inputs[b];
      if (in.layout != arch.layout || in.channels != c || in.height != h || in.width != w ||
          in.data.size() != static_cast<std::size_t>(c * hw)) {
        throw ConfigError("PhaseNet: input shape does not match the architecture");
      }
      x.block(0, static_cast<Eigen::Index>(b) * hw, c, hw) =
          Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
              in.data.data(), c, hw);
    }
    return x;
  }

  Mat infer(const Mat& x) const {
    Mat a = x;
    for (const auto& l : layers) a = l->infer(a);
    return a;
  }

  Mat forward_train(const Mat& x) {
    Mat a = x;
    for (const auto& l : layers) a = l->forward(a);
    return a;
  }

  void backward(const Mat& dz) {
    Mat g = dz;
    for (auto it = layers.rbegin(); it != layers.rend(); ++it) g = (*it)->backward(g);
  }

  std::vector<nn::ParamRef> params() {
    std::vector<nn::ParamRef> out;
    for (auto& l : layers) l->collect_params(out);
    return out;
  }

  std::vector<Mat*> state() {
    std::vector<Mat*> out;
    for (auto& l : layers) l->collect_state(out);
    return out;
  }
};

PhaseNet::PhaseNet(NetArch arch, std::uint64_t seed) : impl_(std::make_unique<Impl>(std::move(arch), seed)) {}
PhaseNet::~PhaseNet() = default;
PhaseNet::PhaseNet(const PhaseNet& other)
    : epoch(other.epoch), best_val_loss(other.best_val_loss), impl_(std::make_unique<Impl>(*other.impl_)) {}
PhaseNet& PhaseNet::operator=(const PhaseNet& other) {
  if (this != &other) {
    impl_ = std::make_unique<Impl>(*other.impl_);
    epoch = other.epoch;
    best_val_loss = other.best_val_loss;
  }
  return *this;
}
PhaseNet::PhaseNet(PhaseNet&&) noexcept = default;
PhaseNet& PhaseNet::operator=(PhaseNet&&) noexcept = default;

const NetArch& PhaseNet::arch() const noexcept { return impl_->arch; }
std::uint64_t PhaseNet::seed() const noexcept { return impl_->seed; }

std::vector<double> PhaseNet::forward(const NetInput& input) const {
  const Mat z = impl_->infer(impl_->to_matrix(std::span<const NetInput>(&input, 1)));
  return {z.data(), z.data() + z.size()};
}

std::vector<std::vector<double>> PhaseNet::forward_batch(std::span<const NetInput> inputs) const {
  std::vector<std::vector<double>> out;
  if (inputs.empty()) return out;
  const Mat z = impl_->infer(impl_->to_matrix(inputs));
  out.reserve(inputs.size());
  for (Eigen::Index b = 0; b < z.cols(); ++b) out.emplace_back(z.col(b).data(), z.col(b).data() + z.rows());
  return out;
}

std::size_t PhaseNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : impl_->params()) n += static_cast<std::size_t>(p.value->size());
  return n;
}

std::vector<double> PhaseNet::parameters() const {
  std::vector<double> out;
  for (const auto& p : impl_->params()) out.insert(out.end(), p.value->data(), p.value->data() + p.value->size());
  return out;
}

void PhaseNet::set_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) throw ConfigError("PhaseNet::set_parameters: wrong length");
  std::size_t k = 0;
  for (auto& p : impl_->params()) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(k), p.value->size(), p.value->data());
    k += static_cast<std::size_t>(p.value->size());
  }
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Objective and its theta-gradient for one sample at phases 2 pi z, with the
// beam at its closed-form optimum.
struct SampleEval {
  double objective;
  std::vector<double> grad_theta;
};

SampleEval evaluate_sample(const DatasetSample& s, const double* z, std::size_t n_s, bool with_gradient) {
  std::vector<double> theta(n_s);
  for (std::size_t n = 0; n < n_s; ++n) theta[n] = kTwoPi * z[n];
  const PhaseConfig phase(std::move(theta));
  const Beamformer beam = optimal_beam(s.channels, phase, s.params);
  SampleEval out{objective(s.channels, phase, beam, s.params), {}};
  if (with_gradient) out.grad_theta = phase_gradient(s.channels, phase, beam, s.params);
  return out;
}

void check_batch(std::span<const DatasetSample> batch, const NetArch& arch) {
  if (batch.empty()) throw ConfigError("loss: batch must hold at least one sample");
  for (const auto& s : batch) {
    if (s.channels.n_s() != static_cast<std::size_t>(arch.n_s) ||
        s.channels.n_t() != static_cast<std::size_t>(arch.n_t) ||
        s.channels.n_r() != static_cast<std::size_t>(arch.n_r)) {
      throw ConfigError("loss: sample dimensions do not match the architecture");
    }
  }
}

std::vector<NetInput> preprocess_all(std::span<const DatasetSample> samples, InputLayout layout) {
  std::vector<NetInput> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(preprocess(s.channels, layout));
  return out;
}

// One training-mode pass: forward, loss, backward. Gradients accumulate into
// the layers' buffers, which the caller zeroes.
double train_pass(PhaseNet::Impl& impl, std::span<const DatasetSample> batch, std::span<const NetInput> inputs) {
  const Mat z = impl.forward_train(impl.to_matrix(inputs));
  if (!z.allFinite()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t n_s = static_cast<std::size_t>(z.rows());
  const double k = static_cast<double>(batch.size());
  Mat dz(z.rows(), z.cols());
  double total = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const SampleEval e = evaluate_sample(batch[b], z.col(static_cast<Eigen::Index>(b)).data(), n_s, true);
    total += e.objective;
    for (std::size_t n = 0; n < n_s; ++n) {
      dz(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(b)) = -kTwoPi * e.grad_theta[n] / k;
    }
  }
  const double loss = -total / k;
  if (std::isfinite(loss)) impl.backward(dz);
  return loss;
}

double inference_loss(const PhaseNet::Impl& impl, std::span<const DatasetSample> samples,
                      std::span<const NetInput> inputs) {
  constexpr std::size_t kChunk = 512;
  double total = 0.0;
  for (std::size_t start = 0; start < samples.size(); start += kChunk) {
    const std::size_t len = std::min(kChunk, samples.size() - start);
    const Mat z = impl.infer(impl.to_matrix(inputs.subspan(start, len)));
    if (!z.allFinite()) return std::numeric_limits<double>::quiet_NaN();
    for (std::size_t b = 0; b < len; ++b) {
      total += evaluate_sample(samples[start + b], z.col(static_cast<Eigen::Index>(b)).data(),
                               static_cast<std::size_t>(z.rows()), false)
                   .objective;
    }
  }
  return -total / static_cast<double>(samples.size());
}

}  // namespace

PhaseNet::LossAndGradient PhaseNet::loss_and_gradient(std::span<const DatasetSample> batch) {
  check_batch(batch, impl_->arch);
  const auto inputs = preprocess_all(batch, impl_->arch.layout);
  auto params = impl_->params();
  for (auto& p : params) p.grad->setZero();
  LossAndGradient out;
  out.loss = train_pass(*impl_, batch, inputs);
  for (const auto& p : params) out.gradient.insert(out.gradient.end(), p.grad->data(), p.grad->data() + p.grad->size());
  return out;
}

PhaseConfig theta_from_z(std::span<const double> z) { return PhaseConfig::from_z(z); }

double loss_batch(std::span<const DatasetSample> batch, const PhaseNet& model) {
  check_batch(batch, model.arch());
  const auto inputs = preprocess_all(batch, model.arch().layout);
  const auto z = model.forward_batch(inputs);
  double total = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const PhaseConfig phase = theta_from_z(z[b]);
    const Beamformer beam = optimal_beam(batch[b].channels, phase, batch[b].params);
    total += objective(batch[b].channels, phase, beam, batch[b].params);
  }
  return -total / static_cast<double>(batch.size());
}

Solution infer_solution(const PhaseNet& model, const ChannelRealization& real, const SystemParams& params) {
  const auto z = model.forward(preprocess(real, model.arch().layout));
  PhaseConfig phase = theta_from_z(z);
  Beamformer beam = optimal_beam(real, phase, params);
  return make_solution(real, std::move(phase), std::move(beam), params, Method::kNeural);
}

// ---------------------------------------------------------------- training

class Trainer {
 public:
  static TrainResult run(std::span<const DatasetSample> dataset, const NetArch& arch, const TrainConfig& cfg);
};

TrainResult Trainer::run(std::span<const DatasetSample> dataset, const NetArch& arch, const TrainConfig& cfg) {
  cfg.validate();
  arch.validate();
  const std::size_t n_train = static_cast<std::size_t>(cfg.train_size);
  const std::size_t n_val = static_cast<std::size_t>(cfg.val_size);
  if (dataset.size() < n_train + n_val) {
    throw ConfigError("train: dataset holds " + std::to_string(dataset.size()) + " samples, need " +
                      std::to_string(n_train + n_val));
  }
  const auto train_set = dataset.subspan(0, n_train);
  const auto val_set = dataset.subspan(n_train, n_val);
  check_batch(train_set, arch);
  check_batch(val_set, arch);
  const auto train_inputs = preprocess_all(train_set, arch.layout);
  const auto val_inputs = preprocess_all(val_set, arch.layout);

  PhaseNet model(arch, derive_seed(cfg.rng_seed, 0));
  PhaseNet::Impl& impl = *model.impl_;
  nn::Adam adam(impl.params());
  PlateauScheduler sched(cfg.initial_lr, cfg.plateau_decay_factor, cfg.plateau_patience, cfg.early_stop_patience);

  TrainResult result{model, {}, 0.0, 0.0, 0, 0, false};
  result.initial_val_loss = inference_loss(impl, val_set, val_inputs);
  if (!std::isfinite(result.initial_val_loss)) throw TrainingError("non-finite validation loss", 0);
  result.best_val_loss = result.initial_val_loss;

  std::vector<std::size_t> order(n_train);
  std::vector<DatasetSample> batch_samples;
  std::vector<NetInput> batch_inputs;
  const std::size_t k = static_cast<std::size_t>(cfg.batch_size);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng.engine());

    const double lr = sched.lr();
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n_train; start += k) {
      const std::size_t len = std::min(k, n_train - start);
      batch_samples.clear();
      batch_inputs.clear();
      for (std::size_t i = start; i < start + len; ++i) {
        batch_samples.push_back(train_set[order[i]]);
        batch_inputs.push_back(train_inputs[order[i]]);
      }
      adam.zero_grad();
      const double loss = train_pass(impl, batch_samples, batch_inputs);
      if (!std::isfinite(loss)) throw TrainingError("non-finite training loss", epoch);
      adam.step(lr);
      loss_sum += loss * static_cast<double>(len);
    }

    const double val_loss = inference_loss(impl, val_set, val_inputs);
    if (!std::isfinite(val_loss)) throw TrainingError("non-finite validation loss", epoch);
    result.curve.push_back({epoch, loss_sum / static_cast<double>(n_train), val_loss, lr});
    result.epochs_run = epoch;

    if (val_loss < result.best_val_loss) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      result.model = model;
    }
    if (sched.step(val_loss)) {
      result.early_stopped = true;
      break;
    }
  }
  result.model.epoch = result.best_epoch;
  result.model.best_val_loss = result.best_val_loss;
  return result;
}

TrainResult train(std::span<const DatasetSample> dataset, const NetArch& arch, const TrainConfig& cfg) {
  return Trainer::run(dataset, arch, cfg);
}

std::string checkpoint_metadata_json(const NetArch& arch, const TrainConfig& cfg, std::uint64_t dataset_hash,
                                     double best_val_loss, int epochs_run) {
  json j;
  j["arch"] = json::parse(arch.to_json());
  j["train_cfg"] = json::parse(cfg.to_json());
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(dataset_hash));
  j["dataset_hash"] = hash;
  j["best_val_loss"] = best_val_loss;
  j["epochs_run"] = epochs_run;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- checkpoint

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint encoding assumes a little-endian host");

constexpr char kCkptMagic[4] = {'I', 'R', 'S', 'N'};
constexpr std::uint32_t kCkptVersion = 1;

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

class Cursor {
 public:
  explicit Cursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string string(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) throw FormatError(std::string("truncated checkpoint while reading ") + what, pos_);
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> PhaseNet::serialize() const {
  std::vector<std::uint8_t> out(std::begin(kCkptMagic), std::end(kCkptMagic));
  put(out, kCkptVersion);
  const std::string arch_json = impl_->arch.to_json();
  put<std::uint64_t>(out, arch_json.size());
  out.insert(out.end(), arch_json.begin(), arch_json.end());
  put<std::uint64_t>(out, impl_->seed);
  put<std::int32_t>(out, epoch);
  put(out, best_val_loss);
  const auto tensors = impl_->state();
  put<std::uint64_t>(out, tensors.size());
  for (const Mat* t : tensors) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(t->rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(t->cols()));
    for (Eigen::Index i = 0; i < t->size(); ++i) put(out, t->data()[i]);
  }
  return out;
}

PhaseNet PhaseNet::deserialize(std::span<const std::uint8_t> bytes) {
  Cursor in(bytes);
  for (char m : kCkptMagic) {
    if (in.remaining() == 0 || static_cast<char>(in.get<std::uint8_t>("magic")) != m) {
      throw FormatError("bad magic, expected \"IRSN\"", 0);
    }
  }
  const std::size_t version_at = in.pos();
  if (in.get<std::uint32_t>("version") != kCkptVersion) throw FormatError("unsupported checkpoint version", version_at);
  const auto json_len = in.get<std::uint64_t>("arch length");
  const std::size_t json_at = in.pos();
  if (json_len > in.remaining()) throw FormatError("truncated checkpoint while reading arch", json_at);
  NetArch arch;
  try {
    arch = NetArch::from_json(in.string(json_len, "arch"));
  } catch (const ConfigError& e) {
    throw FormatError(e.what(), json_at);
  }
  const auto seed = in.get<std::uint64_t>("seed");
  PhaseNet net(arch, seed);
  net.epoch = in.get<std::int32_t>("epoch");
  net.best_val_loss = in.get<double>("best val loss");
  const std::size_t count_at = in.pos();
  const auto count = in.get<std::uint64_t>("tensor count");
  auto tensors = net.impl_->state();
  if (count != tensors.size()) throw FormatError("tensor count does not match the architecture", count_at);
  for (Mat* t : tensors) {
    const std::size_t at = in.pos();
    const auto rows = in.get<std::uint64_t>("tensor rows");
    const auto cols = in.get<std::uint64_t>("tensor cols");
    if (rows != static_cast<std::uint64_t>(t->rows()) || cols != static_cast<std::uint64_t>(t->cols())) {
      throw FormatError("tensor shape does not match the architecture", at);
    }
    in.need(rows * cols * sizeof(double), "tensor data");
    for (Eigen::Index i = 0; i < t->size(); ++i) t->data()[i] = in.get<double>("tensor data");
  }
  if (in.remaining() != 0) throw FormatError("trailing bytes after last tensor", in.pos());
  return net;
}

void PhaseNet::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

PhaseNet PhaseNet::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
  return deserialize(bytes);
}

}  // namespace irsec

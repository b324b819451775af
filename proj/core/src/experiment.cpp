#include "irsec/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"

#include "irsec/errors.hpp"
#include "irsec/random.hpp"

namespace irsec {

namespace {

// Seed streams derived from the root seed.
enum Stream : std::uint64_t {
  kChannels = 1,
  kFading = 2,
  kRandomPhase = 3,
  kAoStart = 4,
  kMonteCarlo = 5,
  kDataChannels = 6,
  kDataFading = 7,
  kMcCheck = 8,
};

std::uint64_t stream_seed(std::uint64_t root, Stream s, std::uint64_t index) {
  return derive_seed(derive_seed(root, s), index);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not an integer");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const unsigned long long u = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return u;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not an unsigned integer");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': '" + v + "' is not a boolean");
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

std::string grid_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

int worker_count(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n) on `threads` workers. Results go to caller-owned
// slots indexed by i, so output order never depends on scheduling.
template <typename Fn>
void parallel_for(int n, int threads, Fn fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

// ---------------------------------------------------------------- config

std::string_view sweep_var_name(SweepVar v) {
  switch (v) {
    case SweepVar::kNs: return "ns";
    case SweepVar::kSnr: return "snr";
    case SweepVar::kRs: return "rs";
  }
  return "unknown";
}

SweepVar parse_sweep_var(std::string_view name) {
  if (name == "ns") return SweepVar::kNs;
  if (name == "snr") return SweepVar::kSnr;
  if (name == "rs") return SweepVar::kRs;
  throw ConfigError("unknown sweep variable '" + std::string(name) + "'");
}

SystemParams ExperimentConfig::system() const {
  SystemParams p;
  p.n_t = n_t;
  p.n_r = n_r;
  p.n_e = n_e;
  p.n_s = n_s;
  p.p_t = power_from_snr_db(snr_db, sigma2);
  p.r_s = r_s;
  p.sigma2 = sigma2;
  p.sigma2_e = sigma2_e;
  return p;
}

NetArch ExperimentConfig::net_arch(int ns) const {
  NetArch a = arch == "reference" ? NetArch::reference(n_t, n_r, ns, layout) : NetArch::desk_scale(n_t, n_r, ns, layout);
  a.batch_norm = batch_norm;
  return a;
}

std::string ExperimentConfig::checkpoint_for(int ns, double snr, double rs) const {
  std::string path = checkpoint_path;
  replace_all(path, "{ns}", std::to_string(ns));
  replace_all(path, "{snr}", grid_label(snr));
  replace_all(path, "{rs}", grid_label(rs));
  return path;
}

void ExperimentConfig::validate() const {
  try {
    system().validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (grid.empty()) throw ConfigError("sweep.grid must be nonempty");
  for (double g : grid) {
    if (!std::isfinite(g)) throw ConfigError("sweep.grid values must be finite");
    if (sweep_var == SweepVar::kNs && (g < 0 || g != std::floor(g))) {
      throw ConfigError("sweep.grid for ns must hold nonnegative integers");
    }
    if (sweep_var == SweepVar::kRs && g < 0) throw ConfigError("sweep.grid for rs must be >= 0");
  }
  if (methods.empty()) throw ConfigError("sweep.methods must be nonempty");
  for (Method m : methods) {
    if (m == Method::kClosedForm) throw ConfigError("sweep.methods: closed_form is not a sweep method");
  }
  if (realizations < 1) throw ConfigError("sweep.realizations must be >= 1");
  if (mc_draws < 1) throw ConfigError("sweep.mc_draws must be >= 1");
  if (threads < 0) throw ConfigError("sweep.threads must be >= 0");
  if (arch != "desk" && arch != "reference") throw ConfigError("train.arch must be 'desk' or 'reference'");
  train.validate();
  ao.validate();
}

std::string ExperimentConfig::emit() const {
  std::ostringstream o;
  auto line = [&o](const char* key, const std::string& v) { o << key << " = " << v << "\n"; };
  line("system.n_t", std::to_string(n_t));
  line("system.n_r", std::to_string(n_r));
  line("system.n_e", std::to_string(n_e));
  line("system.n_s", std::to_string(n_s));
  line("system.snr_db", fmt(snr_db));
  line("system.r_s", fmt(r_s));
  line("system.sigma2", fmt(sigma2));
  line("system.sigma2_e", fmt(sigma2_e));
  line("sweep.var", std::string(sweep_var_name(sweep_var)));
  std::string g;
  for (std::size_t i = 0; i < grid.size(); ++i) g += (i ? "," : "") + fmt(grid[i]);
  line("sweep.grid", g);
  std::string m;
  for (std::size_t i = 0; i < methods.size(); ++i) m += (i ? "," : "") + std::string(method_name(methods[i]));
  line("sweep.methods", m);
  line("sweep.realizations", std::to_string(realizations));
  line("sweep.mc_draws", std::to_string(mc_draws));
  line("sweep.threads", std::to_string(threads));
  line("train.train_size", std::to_string(train.train_size));
  line("train.val_size", std::to_string(train.val_size));
  line("train.max_epochs", std::to_string(train.max_epochs));
  line("train.batch_size", std::to_string(train.batch_size));
  line("train.initial_lr", fmt(train.initial_lr));
  line("train.plateau_decay_factor", fmt(train.plateau_decay_factor));
  line("train.plateau_patience", std::to_string(train.plateau_patience));
  line("train.early_stop_patience", std::to_string(train.early_stop_patience));
  line("train.arch", arch);
  line("train.layout", std::string(layout_name(layout)));
  line("train.batch_norm", batch_norm ? "true" : "false");
  line("seeds.root", std::to_string(seed));
  line("seeds.train", std::to_string(train.rng_seed));
  line("ao.max_outer_iters", std::to_string(ao.max_outer_iters));
  line("ao.grad_steps_per_outer", std::to_string(ao.grad_steps_per_outer));
  line("ao.step_size", fmt(ao.step_size));
  line("ao.step_decay", fmt(ao.step_decay));
  line("ao.tol_objective", fmt(ao.tol_objective));
  line("ao.restarts", std::to_string(ao.restarts));
  line("ao.max_halvings", std::to_string(ao.max_halvings));
  line("paths.dataset", dataset_path);
  line("paths.checkpoint", checkpoint_path);
  line("paths.out", out_path);
  return o.str();
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError("config key '" + key + "' given twice");

    auto as_int = [&] { return static_cast<int>(to_int(key, v)); };
    if (key == "system.n_t") c.n_t = as_int();
    else if (key == "system.n_r") c.n_r = as_int();
    else if (key == "system.n_e") c.n_e = as_int();
    else if (key == "system.n_s") c.n_s = as_int();
    else if (key == "system.snr_db") c.snr_db = to_double(key, v);
    else if (key == "system.r_s") c.r_s = to_double(key, v);
    else if (key == "system.sigma2") c.sigma2 = to_double(key, v);
    else if (key == "system.sigma2_e") c.sigma2_e = to_double(key, v);
    else if (key == "sweep.var") c.sweep_var = parse_sweep_var(v);
    else if (key == "sweep.grid") {
      c.grid.clear();
      for (const auto& item : split(v, ',')) c.grid.push_back(to_double(key, item));
    } else if (key == "sweep.methods") {
      c.methods.clear();
      for (const auto& item : split(v, ',')) c.methods.push_back(parse_method(item));
    } else if (key == "sweep.realizations") c.realizations = as_int();
    else if (key == "sweep.mc_draws") c.mc_draws = to_u64(key, v);
    else if (key == "sweep.threads") c.threads = as_int();
    else if (key == "train.train_size") c.train.train_size = as_int();
    else if (key == "train.val_size") c.train.val_size = as_int();
    else if (key == "train.max_epochs") c.train.max_epochs = as_int();
    else if (key == "train.batch_size") c.train.batch_size = as_int();
    else if (key == "train.initial_lr") c.train.initial_lr = to_double(key, v);
    else if (key == "train.plateau_decay_factor") c.train.plateau_decay_factor = to_double(key, v);
    else if (key == "train.plateau_patience") c.train.plateau_patience = as_int();
    else if (key == "train.early_stop_patience") c.train.early_stop_patience = as_int();
    else if (key == "train.arch") c.arch = v;
    else if (key == "train.layout") c.layout = parse_layout(v);
    else if (key == "train.batch_norm") c.batch_norm = to_bool(key, v);
    else if (key == "seeds.root") c.seed = to_u64(key, v);
    else if (key == "seeds.train") c.train.rng_seed = to_u64(key, v);
    else if (key == "ao.max_outer_iters") c.ao.max_outer_iters = as_int();
    else if (key == "ao.grad_steps_per_outer") c.ao.grad_steps_per_outer = as_int();
    else if (key == "ao.step_size") c.ao.step_size = to_double(key, v);
    else if (key == "ao.step_decay") c.ao.step_decay = to_double(key, v);
    else if (key == "ao.tol_objective") c.ao.tol_objective = to_double(key, v);
    else if (key == "ao.restarts") c.ao.restarts = as_int();
    else if (key == "ao.max_halvings") c.ao.max_halvings = as_int();
    else if (key == "paths.dataset") c.dataset_path = v;
    else if (key == "paths.checkpoint") c.checkpoint_path = v;
    else if (key == "paths.out") c.out_path = v;
    else throw ConfigError("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return parse(s.str());
}

// ---------------------------------------------------------------- data

std::vector<DatasetSample> generate_dataset(const ExperimentConfig& cfg, std::uint64_t count) {
  const SystemParams base = cfg.system();
  std::vector<DatasetSample> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    SystemParams p = base;
    std::tie(p.beta_d, p.beta_r) = sample_large_scale(stream_seed(cfg.seed, kDataFading, i));
    out.push_back({sample_legit(p, stream_seed(cfg.seed, kDataChannels, i)), p});
  }
  return out;
}

void cmd_gen_data(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::uint64_t count = static_cast<std::uint64_t>(cfg.train.train_size) + cfg.train.val_size;
  const auto samples = generate_dataset(cfg, count);
  const std::filesystem::path path = cfg.dataset_path;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_dataset(path, samples, cfg.system());

  nlohmann::json meta;
  meta["format"] = "IRSD";
  meta["version"] = kDatasetVersion;
  meta["seed"] = cfg.seed;
  meta["rng_algorithm"] = std::string(kRngAlgorithm);
  meta["count"] = count;
  meta["train_size"] = cfg.train.train_size;
  meta["val_size"] = cfg.train.val_size;
  meta["n_t"] = cfg.n_t;
  meta["n_r"] = cfg.n_r;
  meta["n_e"] = cfg.n_e;
  meta["n_s"] = cfg.n_s;
  meta["snr_db"] = cfg.snr_db;
  meta["r_s"] = cfg.r_s;
  write_text(path.string() + ".meta.json", meta.dump(2) + "\n");
}

TrainSummary cmd_train(const ExperimentConfig& cfg) {
  cfg.validate();
  if (!std::filesystem::exists(cfg.dataset_path)) throw ConfigError("dataset " + cfg.dataset_path + " not found");
  const auto data = read_dataset(cfg.dataset_path, cfg.n_e);
  if (data.empty()) throw ConfigError("dataset " + cfg.dataset_path + " is empty");
  const int ns = static_cast<int>(data.front().channels.n_s());

  TrainSummary s{{}, {}, {}, train(data, cfg.net_arch(ns), cfg.train)};
  s.checkpoint = cfg.checkpoint_for(ns, cfg.snr_db, cfg.r_s);
  s.metadata = s.checkpoint.string() + ".json";
  s.curve = s.checkpoint.string() + ".curve.csv";
  if (s.checkpoint.has_parent_path()) std::filesystem::create_directories(s.checkpoint.parent_path());
  s.result.model.save(s.checkpoint);
  write_text(s.metadata, checkpoint_metadata_json(s.result.model.arch(), cfg.train, file_hash(cfg.dataset_path),
                                                  s.result.best_val_loss, s.result.epochs_run));
  std::string curve = "epoch,train_loss,val_loss,lr\n";
  for (const auto& e : s.result.curve) {
    curve += std::to_string(e.epoch) + "," + csv_num(e.train_loss) + "," + csv_num(e.val_loss) + "," +
             csv_num(e.lr) + "\n";
  }
  write_text(s.curve, curve);
  return s;
}

// ---------------------------------------------------------------- sweeps

SystemParams grid_setting(const ExperimentConfig& cfg, double grid_value) {
  SystemParams p = cfg.system();
  switch (cfg.sweep_var) {
    case SweepVar::kNs: p.n_s = static_cast<int>(grid_value); break;
    case SweepVar::kSnr: p.p_t = power_from_snr_db(grid_value, cfg.sigma2); break;
    case SweepVar::kRs: p.r_s = grid_value; break;
  }
  return p;
}

SweepInstance sweep_instance(const ExperimentConfig& cfg, const SystemParams& setting, int index) {
  const auto i = static_cast<std::uint64_t>(index);
  SweepInstance inst;
  inst.params = setting;
  std::tie(inst.params.beta_d, inst.params.beta_r) = sample_large_scale(stream_seed(cfg.seed, kFading, i));
  inst.channels = sample_legit(inst.params, stream_seed(cfg.seed, kChannels, i));
  inst.random_phase_seed = stream_seed(cfg.seed, kRandomPhase, i);
  inst.ao_seed = stream_seed(cfg.seed, kAoStart, i);
  inst.mc_seed = stream_seed(cfg.seed, kMonteCarlo, i);
  return inst;
}

namespace {

double setting_snr_db(const SystemParams& p) { return 10.0 * std::log10(p.p_t / p.sigma2); }

const PhaseNet& find_model(const ExperimentConfig& cfg, const SystemParams& setting,
                           const std::map<std::string, PhaseNet>& given, std::map<std::string, PhaseNet>& loaded) {
  const double snr = cfg.sweep_var == SweepVar::kSnr ? setting_snr_db(setting) : cfg.snr_db;
  const std::string path = cfg.checkpoint_for(setting.n_s, snr, setting.r_s);
  if (auto it = given.find(path); it != given.end()) return it->second;
  if (auto it = loaded.find(path); it != loaded.end()) return it->second;
  if (!std::filesystem::exists(path)) throw ConfigError("neural method requested but checkpoint " + path + " is missing");
  PhaseNet net = PhaseNet::load(path);
  const NetArch& a = net.arch();
  if (a.n_s != setting.n_s || a.n_t != setting.n_t || a.n_r != setting.n_r) {
    throw ConfigError("checkpoint " + path + " was trained for different dimensions");
  }
  return loaded.emplace(path, std::move(net)).first->second;
}

Solution solve(Method m, const SweepInstance& inst, const AoConfig& ao_base, const PhaseNet* model) {
  switch (m) {
    case Method::kMrtNoIrs: return mrt_no_irs(inst.channels.h_b, inst.params);
    case Method::kRandomPhase: return random_phase(inst.channels, inst.params, inst.random_phase_seed);
    case Method::kAo: {
      AoConfig c = ao_base;
      c.rng_seed = inst.ao_seed;
      return ao_solve(inst.channels, inst.params, c);
    }
    case Method::kNeural: return infer_solution(*model, inst.channels, inst.params);
    case Method::kClosedForm: break;
  }
  throw ConfigError("method " + std::string(method_name(m)) + " cannot be swept");
}

McEstimate solution_mc(const Solution& s, const SweepInstance& inst, std::uint64_t draws) {
  if (s.method == Method::kMrtNoIrs) {
    return mc_outage(without_irs(inst.channels.h_b), s.phase, s.beam, inst.params, draws, inst.mc_seed);
  }
  return mc_outage(inst.channels, s.phase, s.beam, inst.params, draws, inst.mc_seed);
}

}  // namespace

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::map<std::string, PhaseNet>& models) {
  cfg.validate();
  std::map<std::string, PhaseNet> loaded;
  std::vector<SweepRow> rows;
  const int threads = worker_count(cfg.threads);
  for (double g : cfg.grid) {
    const SystemParams setting = grid_setting(cfg, g);
    setting.validate();
    for (Method m : cfg.methods) {
      const PhaseNet* model = m == Method::kNeural ? &find_model(cfg, setting, models, loaded) : nullptr;
      std::vector<Solution> sols(cfg.realizations);
      std::vector<McEstimate> mcs(cfg.realizations);
      parallel_for(cfg.realizations, threads, [&](int i) {
        const SweepInstance inst = sweep_instance(cfg, setting, i);
        sols[i] = solve(m, inst, cfg.ao, model);
        mcs[i] = solution_mc(sols[i], inst, cfg.mc_draws);
      });
      SweepRow row;
      row.grid_value = g;
      row.method = m;
      row.realizations = cfg.realizations;
      row.seed = cfg.seed;
      double var_sum = 0.0;
      for (int i = 0; i < cfg.realizations; ++i) {
        row.mean_p_out_closed += sols[i].eval.p_out;
        row.mean_p_out_mc += mcs[i].p_hat;
        row.mean_objective += sols[i].eval.objective;
        var_sum += mcs[i].std_error * mcs[i].std_error;
      }
      const double n = cfg.realizations;
      row.mean_p_out_closed /= n;
      row.mean_p_out_mc /= n;
      row.mean_objective /= n;
      row.stderr_mc = std::sqrt(var_sum) / n;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "grid_var,method,mean_p_out_closed,mean_p_out_mc,stderr_mc,mean_objective,realizations,seed\n";
  for (const auto& r : rows) {
    out += grid_label(r.grid_value) + "," + std::string(method_name(r.method)) + "," + csv_num(r.mean_p_out_closed) +
           "," + csv_num(r.mean_p_out_mc) + "," + csv_num(r.stderr_mc) + "," + csv_num(r.mean_objective) + "," +
           std::to_string(r.realizations) + "," + std::to_string(r.seed) + "\n";
  }
  return out;
}

void cmd_sweep(const ExperimentConfig& cfg) { write_text(cfg.out_path, sweep_csv(run_sweep(cfg))); }

// ---------------------------------------------------------------- timing

std::vector<TimingRow> run_bench_time(const ExperimentConfig& cfg, int solves,
                                      const std::map<std::string, PhaseNet>& models) {
  cfg.validate();
  if (solves < 1) throw ConfigError("bench-time: solves must be >= 1");
  std::vector<int> ns_grid;
  if (cfg.sweep_var == SweepVar::kNs) {
    for (double g : cfg.grid) ns_grid.push_back(static_cast<int>(g));
  } else {
    ns_grid.push_back(cfg.n_s);
  }
  std::map<std::string, PhaseNet> loaded;
  std::vector<TimingRow> rows;
  for (Method m : cfg.methods) {
    for (int ns : ns_grid) {
      SystemParams setting = cfg.system();
      setting.n_s = ns;
      const PhaseNet* model = m == Method::kNeural ? &find_model(cfg, setting, models, loaded) : nullptr;
      std::vector<SweepInstance> insts;
      for (int i = 0; i <= solves; ++i) insts.push_back(sweep_instance(cfg, setting, i));
      double sink = solve(m, insts[0], cfg.ao, model).eval.objective;  // warm-up, not timed
      const auto t0 = std::chrono::steady_clock::now();
      for (int i = 1; i <= solves; ++i) sink += solve(m, insts[i], cfg.ao, model).eval.objective;
      const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (!std::isfinite(sink)) throw NumericalError("bench-time: non-finite objective", sink);
      rows.push_back({m, ns, total, total / solves});
    }
  }
  return rows;
}

std::string timing_csv(const std::vector<TimingRow>& rows) {
  std::string out = "method,N_s,total_seconds,per_solve_seconds\n";
  for (const auto& r : rows) {
    out += std::string(method_name(r.method)) + "," + std::to_string(r.n_s) + "," + csv_num(r.total_seconds) + "," +
           csv_num(r.per_solve_seconds) + "\n";
  }
  return out;
}

void cmd_bench_time(const ExperimentConfig& cfg) { write_text(cfg.out_path, timing_csv(run_bench_time(cfg))); }

// ---------------------------------------------------------------- MC check

std::vector<McCheckRow> run_validate_mc(const ExperimentConfig& cfg, int configs) {
  if (configs < 1) throw ConfigError("validate-mc: configs must be >= 1");
  if (cfg.mc_draws < 1) throw ConfigError("validate-mc: mc_draws must be >= 1");
  constexpr int kNe[3] = {1, 2, 4};
  constexpr int kNs[3] = {8, 16, 32};
  std::vector<McCheckRow> rows(configs);
  parallel_for(configs, worker_count(cfg.threads), [&](int k) {
    const std::uint64_t seed = stream_seed(cfg.seed, kMcCheck, static_cast<std::uint64_t>(k));
    Rng rng(seed);
    SystemParams p = cfg.system();
    p.n_e = kNe[k % 3];
    p.n_s = kNs[(k / 3) % 3];
    std::tie(p.beta_d, p.beta_r) = sample_large_scale(derive_seed(seed, 1));
    if (k == 0) {
      p.n_e = 1;
      p.beta_r = 0.0;
    }
    p.r_s = rng.uniform(0.5, 2.5);
    const ChannelRealization real = sample_legit(p, derive_seed(seed, 2));
    std::vector<double> theta(p.n_s);
    for (double& t : theta) t = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const PhaseConfig phase(std::move(theta));
    const Beamformer beam = Beamformer::from_direction(complex_normal_vector(rng, p.n_t));

    McCheckRow& row = rows[k];
    row.config = k;
    row.n_e = p.n_e;
    row.n_s = p.n_s;
    row.beta_d = p.beta_d;
    row.beta_r = p.beta_r;
    row.r_s = p.r_s;
    row.seed = seed;
    row.p_closed = outage_closed_form(real, phase, beam, p).p_out;
    const McEstimate mc = mc_outage(real, phase, beam, p, cfg.mc_draws, derive_seed(seed, 3));
    row.p_mc = mc.p_hat;
    row.stderr_mc = mc.std_error;
    const double sd = std::sqrt(row.p_closed * (1.0 - row.p_closed) / static_cast<double>(cfg.mc_draws));
    const double diff = std::abs(row.p_mc - row.p_closed);
    row.ratio = sd > 0.0 ? diff / (3.0 * sd) : (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  });
  return rows;
}

std::string validate_mc_csv(const std::vector<McCheckRow>& rows) {
  std::string out = "config,n_e,n_s,beta_d,beta_r,r_s,p_closed,p_mc,stderr_mc,ratio,pass,seed\n";
  for (const auto& r : rows) {
    out += std::to_string(r.config) + "," + std::to_string(r.n_e) + "," + std::to_string(r.n_s) + "," +
           csv_num(r.beta_d) + "," + csv_num(r.beta_r) + "," + csv_num(r.r_s) + "," + csv_num(r.p_closed) + "," +
           csv_num(r.p_mc) + "," + csv_num(r.stderr_mc) + "," + csv_num(r.ratio) + "," +
           (r.ratio <= 1.0 ? "true" : "false") + "," + std::to_string(r.seed) + "\n";
  }
  return out;
}

bool validate_mc_passed(const std::vector<McCheckRow>& rows) {
  for (const auto& r : rows) {
    if (!(r.ratio <= 1.0)) return false;
  }
  return !rows.empty();
}

bool cmd_validate_mc(const ExperimentConfig& cfg) {
  const auto rows = run_validate_mc(cfg);
  write_text(cfg.out_path, validate_mc_csv(rows));
  return validate_mc_passed(rows);
}

}  // namespace irsec

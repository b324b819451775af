#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "irsec/errors.hpp"
#include "irsec/experiment.hpp"

using namespace irsec;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("irsec_exp_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.realizations = 8;
  c.mc_draws = 200;
  c.threads = 1;
  c.grid = {4, 8};
  c.ao.max_outer_iters = 10;
  return c;
}

}  // namespace

TEST(Config, EmitParseRoundTrip) {
  ExperimentConfig c;
  c.snr_db = 7.123456789012345;
  c.r_s = 0.1 + 0.2;
  c.sweep_var = SweepVar::kRs;
  c.grid = {2.0, 2.5, 1.0 / 3.0};
  c.methods = {Method::kAo, Method::kNeural};
  c.train.initial_lr = 3e-4;
  c.train.rng_seed = 18446744073709551615ULL;
  c.seed = 99;
  c.layout = InputLayout::kRowStack;
  c.batch_norm = false;
  c.arch = "reference";
  c.ao.step_size = 0.3;
  c.checkpoint_path = "ckpt/m_{ns}_{snr}.irsn";
  EXPECT_EQ(ExperimentConfig::parse(c.emit()), c);
  EXPECT_EQ(ExperimentConfig::parse(ExperimentConfig{}.emit()), ExperimentConfig{});
  EXPECT_EQ(ExperimentConfig::parse(""), ExperimentConfig{});
}

TEST(Config, ParsesCommentsAndRejectsBadInput) {
  const auto c = ExperimentConfig::parse("# header\nsystem.n_s = 24  # trailing\n\nsweep.methods = no_irs, ao\n");
  EXPECT_EQ(c.n_s, 24);
  EXPECT_EQ(c.methods, (std::vector<Method>{Method::kMrtNoIrs, Method::kAo}));
  EXPECT_THROW(ExperimentConfig::parse("system.bogus = 1\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("system.n_s 4\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("system.n_s = four\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("system.n_s = 4\nsystem.n_s = 5\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("sweep.grid =\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("sweep.realizations = 0\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("sweep.mc_draws = 0\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("sweep.methods = magic\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("sweep.var = beta\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("sweep.grid = 16.5\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("train.plateau_decay_factor = 1.5\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("train.arch = huge\n"), ConfigError);
}

TEST(Config, ReferenceScaleTrainingIsAccepted) {
  const auto c = ExperimentConfig::parse(
      "train.arch = reference\ntrain.train_size = 800000\ntrain.val_size = 200000\n"
      "train.max_epochs = 2000\ntrain.batch_size = 1000\n");
  EXPECT_EQ(c.net_arch(48), NetArch::reference(4, 2, 48));
  EXPECT_EQ(c.train.batch_size, 1000);
}

TEST(Config, CheckpointTemplate) {
  ExperimentConfig c;
  c.checkpoint_path = "m/{ns}/{snr}/{rs}.irsn";
  EXPECT_EQ(c.checkpoint_for(48, 10, 3.5), "m/48/10/3.5.irsn");
}

TEST(GenData, DeterministicAndSidecar) {
  const fs::path dir = scratch_dir("gen");
  ExperimentConfig c;
  c.n_s = 6;
  c.train.train_size = 30;
  c.train.val_size = 10;
  c.dataset_path = (dir / "a.irsd").string();
  cmd_gen_data(c);
  const std::string first = slurp(c.dataset_path);
  cmd_gen_data(c);
  EXPECT_EQ(slurp(c.dataset_path), first);

  const auto data = read_dataset(c.dataset_path, c.n_e);
  ASSERT_EQ(data.size(), 40u);
  for (const auto& s : data) {
    EXPECT_EQ(s.channels.n_s(), 6u);
    EXPECT_GT(s.params.beta_d, 0.0);
    EXPECT_LT(s.params.beta_r, 1.0);
    EXPECT_DOUBLE_EQ(s.params.p_t, 10.0);
  }
  const std::string meta = slurp(c.dataset_path + ".meta.json");
  EXPECT_NE(meta.find("\"seed\": 1"), std::string::npos);
  EXPECT_NE(meta.find("mt19937_64"), std::string::npos);
  EXPECT_NE(meta.find("\"count\": 40"), std::string::npos);

  c.seed = 2;
  cmd_gen_data(c);
  EXPECT_NE(slurp(c.dataset_path), first);
  fs::remove_all(dir);
}

TEST(GenData, EmptyDatasetIsValid) {
  const fs::path path = scratch_dir("empty") / "e.irsd";
  write_dataset(path, std::vector<DatasetSample>{}, ExperimentConfig{}.system());
  EXPECT_TRUE(read_dataset(path).empty());
  fs::remove_all(path.parent_path());
}

TEST(Train, WrapperWritesCheckpointMetadataAndCurve) {
  const fs::path dir = scratch_dir("train");
  ExperimentConfig c;
  c.n_s = 4;
  c.train.train_size = 40;
  c.train.val_size = 10;
  c.train.max_epochs = 3;
  c.train.batch_size = 16;
  c.dataset_path = (dir / "d.irsd").string();
  c.checkpoint_path = (dir / "m_{ns}.irsn").string();
  cmd_gen_data(c);
  const TrainSummary s = cmd_train(c);
  EXPECT_EQ(s.checkpoint, dir / "m_4.irsn");
  ASSERT_TRUE(fs::exists(s.checkpoint));
  EXPECT_EQ(PhaseNet::load(s.checkpoint).serialize(), s.result.model.serialize());

  const std::string meta = slurp(s.metadata);
  for (const char* key : {"\"arch\"", "\"train_cfg\"", "\"dataset_hash\"", "\"best_val_loss\"", "\"epochs_run\""})
    EXPECT_NE(meta.find(key), std::string::npos) << key;

  std::istringstream curve(slurp(s.curve));
  std::string line;
  std::getline(curve, line);
  EXPECT_EQ(line, "epoch,train_loss,val_loss,lr");
  int rows = 0;
  while (std::getline(curve, line)) ++rows;
  EXPECT_EQ(rows, s.result.epochs_run);
  fs::remove_all(dir);
}

TEST(Train, MissingDatasetIsConfigError) {
  ExperimentConfig c;
  c.dataset_path = "/nonexistent/irsec/data.irsd";
  EXPECT_THROW(cmd_train(c), ConfigError);
}

TEST(Sweep, CsvShapeAndRanges) {
  ExperimentConfig c = small_config();
  const auto rows = run_sweep(c);
  ASSERT_EQ(rows.size(), 6u);
  const std::string csv = sweep_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "grid_var,method,mean_p_out_closed,mean_p_out_mc,stderr_mc,mean_objective,realizations,seed");
  for (const auto& r : rows) {
    EXPECT_GE(r.mean_p_out_closed, 0.0);
    EXPECT_LE(r.mean_p_out_closed, 1.0);
    EXPECT_GE(r.stderr_mc, 0.0);
    EXPECT_EQ(r.realizations, 8);
  }
  // Byte-identical on rerun, and independent of the worker count.
  EXPECT_EQ(sweep_csv(run_sweep(c)), csv);
  c.threads = 3;
  EXPECT_EQ(sweep_csv(run_sweep(c)), csv);
}

TEST(Sweep, NoIrsRowsConstantAcrossNs) {
  ExperimentConfig c = small_config();
  c.grid = {4, 12, 20};
  c.methods = {Method::kMrtNoIrs};
  const auto rows = run_sweep(c);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.mean_p_out_closed, rows[0].mean_p_out_closed);
    EXPECT_EQ(r.mean_p_out_mc, rows[0].mean_p_out_mc);
    EXPECT_EQ(r.mean_objective, rows[0].mean_objective);
  }
}

TEST(Sweep, RsSweepIsMonotoneForFixedPhaseMethods) {
  ExperimentConfig c = small_config();
  c.sweep_var = SweepVar::kRs;
  c.n_s = 8;
  c.grid = {2.0, 2.5, 3.0, 3.5, 4.0, 4.5};
  c.methods = {Method::kMrtNoIrs, Method::kRandomPhase};
  const auto rows = run_sweep(c);
  for (std::size_t i = 2; i < rows.size(); ++i)
    EXPECT_GE(rows[i].mean_p_out_closed, rows[i - 2].mean_p_out_closed - 1e-12);
}

TEST(Sweep, MissingCheckpointIsConfigError) {
  ExperimentConfig c = small_config();
  c.methods = {Method::kNeural};
  c.checkpoint_path = "/nonexistent/model_{ns}.irsn";
  EXPECT_THROW(run_sweep(c), ConfigError);
}

TEST(Sweep, NeuralUsesSuppliedModels) {
  ExperimentConfig c = small_config();
  c.grid = {4};
  c.methods = {Method::kNeural};
  c.checkpoint_path = "mem_{ns}";
  std::map<std::string, PhaseNet> models;
  models.emplace("mem_4", PhaseNet(NetArch::desk_scale(4, 2, 4), 1));
  const auto rows = run_sweep(c, models);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].method, Method::kNeural);
}

TEST(Sweep, InstancesShareRandomNumbersAcrossGrid) {
  const ExperimentConfig c = small_config();
  SystemParams a = c.system(), b = c.system();
  a.n_s = 8;
  b.n_s = 24;
  const auto ia = sweep_instance(c, a, 3), ib = sweep_instance(c, b, 3);
  EXPECT_EQ(ia.channels.h_b, ib.channels.h_b);
  EXPECT_EQ(ia.params.beta_d, ib.params.beta_d);
  EXPECT_EQ(ia.mc_seed, ib.mc_seed);
  EXPECT_NE(sweep_instance(c, a, 4).channels.h_b, ia.channels.h_b);
}

TEST(BenchTime, RowsPerMethodAndNs) {
  ExperimentConfig c = small_config();
  c.methods = {Method::kRandomPhase, Method::kAo};
  const auto rows = run_bench_time(c, 3);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_GE(r.total_seconds, 0.0);
    EXPECT_NEAR(r.per_solve_seconds * 3, r.total_seconds, 1e-12);
  }
  const std::string csv = timing_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "method,N_s,total_seconds,per_solve_seconds");
}

TEST(ValidateMc, ConfigsAndSeeds) {
  ExperimentConfig c;
  c.mc_draws = 20000;
  c.threads = 1;
  const auto rows = run_validate_mc(c, 20);
  ASSERT_EQ(rows.size(), 20u);
  EXPECT_EQ(rows[0].n_e, 1);
  EXPECT_EQ(rows[0].beta_r, 0.0);
  std::set<int> ne, ns;
  std::set<std::uint64_t> seeds;
  for (const auto& r : rows) {
    ne.insert(r.n_e);
    ns.insert(r.n_s);
    seeds.insert(r.seed);
  }
  EXPECT_EQ(ne, (std::set<int>{1, 2, 4}));
  EXPECT_EQ(ns, (std::set<int>{8, 16, 32}));
  EXPECT_EQ(seeds.size(), 20u);
  EXPECT_TRUE(validate_mc_passed(rows)) << validate_mc_csv(rows);
  EXPECT_EQ(validate_mc_csv(run_validate_mc(c, 20)), validate_mc_csv(rows));
}

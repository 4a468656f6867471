#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "emofuse/config.hpp"
#include "emofuse/dataset.hpp"
#include "emofuse/gradcheck.hpp"
#include "emofuse/head.hpp"
#include "emofuse/training.hpp"
#include "json.hpp"

// Command-line surface: train, eval, grad-check, loss-demo and sweep.

namespace emofuse {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitModelMismatch = 4,
};

/// Runs one command line (without the program name). Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct LossScenario {
  std::string name;
  std::size_t target = 0;
  Vec p_emo;
};

/// The four canonical cases (true, false, easy false, hard false) over the
/// default eight-class taxonomy.
std::vector<LossScenario> loss_demo_scenarios();

struct LossDemoRow {
  std::string name;
  LossBreakdown loss;
};

std::vector<LossDemoRow> run_loss_demo(double lambda = 1.0);

/// Grad-check runner: prints the table, then "FAILED: <component>" per failing
/// component. Returns kExitOk or kExitCheckFailed.
int run_gradcheck_command(const std::vector<GradCheckCase>& cases, std::uint64_t seed, std::ostream& out,
                          std::ostream& err);

nlohmann::json metrics_to_json(const Metrics& m, const Taxonomy& t);

enum class SweepParam { lambda, n_max };
SweepParam sweep_param_from_string(const std::string& s);
std::string to_string(SweepParam p);

/// Parses "0,0.5,1". Throws ConfigError on an empty list or a bad number.
std::vector<double> parse_values(const std::string& s);

struct SweepRow {
  double value = 0.0;
  Metrics metrics;
  EpochSummary last_epoch;
};

/// One fresh train + eval per value on the same train/test data, every run
/// seeded with config.seed.
std::vector<SweepRow> run_sweep(SweepParam param, const std::vector<double>& values, const TrainConfig& config,
                                const Dataset& train, const Dataset& test);

std::string sweep_csv(SweepParam param, const std::vector<SweepRow>& rows);

}  // namespace emofuse

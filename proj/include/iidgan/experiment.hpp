#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "iidgan/metrics.hpp"
#include "iidgan/training.hpp"

namespace iidgan {

inline constexpr int kConfigSchema = 1;

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitDiverged = 3,
  kExitCheckpoint = 4,
};

struct ExportOptions {
  bool checkpoint = true;   // final checkpoint per seed
  bool qq = false;          // final QQ CSVs per seed
  bool dataset = false;     // the real evaluation draws, x0,x1,mode
};

/// A named override of the loss settings, used by sweep.
struct Variant {
  std::string name;
  GauVariant gau_variant = GauVariant::W2_MD;
  std::optional<double> lambda_re;
  std::optional<double> lambda_gau;
};

struct ExperimentConfig {
  TrainConfig train;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::filesystem::path out_dir = "runs";
  EvalOptions eval;
  ExportOptions exports;
  std::vector<Variant> variants;
  std::uint64_t config_hash = 0;   // FNV-1a of the source bytes

  /// Training configuration for one seed (and optionally one variant).
  TrainConfig for_seed(std::uint64_t seed, const Variant* variant = nullptr) const;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::uint64_t h);

/// Parses and validates; throws ConfigError. The hash is taken over `text`.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

/// `step,modes,quality,rkl,sw_1..sw_M,ks_1..ks_M`.
std::string metrics_csv_header(std::size_t latent_dim);
std::string metrics_csv_row(std::uint64_t step, const MetricsReport& r);

/// Evaluation stream for a given seed and step, shared by train and eval.
Rng eval_rng(std::uint64_t seed, std::uint64_t step);
Rng iidtest_rng(std::uint64_t seed, std::uint64_t step);

struct SeedResult {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  MetricsReport report;
  TrainerState state;
};

struct Aggregate {
  double mean = 0.0;
  std::optional<double> std;   // sample std, absent for a single seed
};

Aggregate aggregate(const std::vector<double>& values);

/// Trains every seed (in parallel up to the thread cap), writes
/// `<out>/seed_<s>/metrics.csv`, optional checkpoints and exports, and
/// `<out>/summary.json`. Results are ordered as cfg.seeds.
std::vector<SeedResult> run_experiment(const ExperimentConfig& cfg,
                                       const std::filesystem::path& out,
                                       const Variant* variant = nullptr);

/// As run_experiment, printing one line per evaluation to `log` when set.
std::vector<SeedResult> run_experiment_logged(const ExperimentConfig& cfg,
                                              const std::filesystem::path& out,
                                              const Variant* variant, std::ostream* log);

nlohmann::json summary_json(const ExperimentConfig& cfg, const std::vector<SeedResult>& results,
                            const Variant* variant = nullptr);

/// IIDGAN_THREADS if set to a positive integer, else the hardware count.
std::size_t thread_cap();

void write_qq_csvs(const std::filesystem::path& dir, const Matrix& inverse);

int cmd_train(const std::filesystem::path& config, const std::optional<std::filesystem::path>& out,
              std::ostream& log);
int cmd_eval(const std::filesystem::path& manifest, const std::filesystem::path& config,
             std::ostream& out, std::ostream& log);
int cmd_iidtest(const std::filesystem::path& manifest, const std::filesystem::path& config,
                const std::filesystem::path& qq_out, std::ostream& out, std::ostream& log);
int cmd_sweep(const std::filesystem::path& config, std::ostream& out, std::ostream& log);

}  // namespace iidgan

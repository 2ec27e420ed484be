#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

#include "iidgan/adam.hpp"
#include "iidgan/error.hpp"
#include "iidgan/losses.hpp"
#include "iidgan/mlp.hpp"
#include "iidgan/rng.hpp"
#include "iidgan/synthdata.hpp"

namespace iidgan {

enum class Dataset { Ring, Grid };

std::string dataset_name(Dataset d);
Dataset parse_dataset(std::string_view name);

struct TrainConfig {
  std::size_t latent_dim = 2;
  std::size_t target_dim = 2;
  std::size_t batch_size = 256;
  std::size_t steps = 24000;
  std::size_t eval_every = 2000;
  std::size_t d_steps = 1;
  double lambda_re = 1.0;
  double lambda_gau = 1.0;
  GauVariant gau_variant = GauVariant::W2_MD;
  double pnorm_p = 2.0;
  AdamParams adam;
  std::uint64_t seed = 0;
  Dataset dataset = Dataset::Ring;
  std::optional<double> dataset_std;

  LossWeights weights() const;
  GaussianMixture mixture() const;
};

/// Throws ConfigError on invalid settings. A None variant forces
/// lambda_gau to 0.
TrainConfig validated(TrainConfig cfg);

nlohmann::json train_config_to_json(const TrainConfig& cfg);

/// Reads the training fields from `doc`, defaulting any that are absent.
/// Throws ConfigError on wrong types or invalid values.
TrainConfig train_config_from_json(const nlohmann::json& doc);

struct TrainerState {
  Mlp g;                       // latent → data
  Mlp f;                       // data → latent
  Mlp d;                       // data → (0, 1)
  std::optional<Mlp> dz;       // latent → (0, 1), ZDisc only
  AdamState adam_g;
  AdamState adam_f;
  AdamState adam_d;
  std::optional<AdamState> adam_dz;
  std::uint64_t step = 0;
  Rng rng;
};

/// Networks with the four-layer 100-200-100 shape, seeded from cfg.seed.
TrainerState trainer_new(const TrainConfig& cfg);

struct StepReport {
  std::uint64_t step = 0;   // step index after the update
  double d_loss = 0.0;
  double dz_loss = 0.0;     // ZDisc only
  double g_adv = 0.0;
  double recon = 0.0;
  double gau = 0.0;
  double total = 0.0;       // g_adv + λ_re·recon + λ_Gau·gau
};

/// Raised when a loss or gradient stops being finite.
class TrainingDiverged : public NonFiniteError {
 public:
  TrainingDiverged(std::uint64_t step, const std::string& what);
  std::uint64_t step() const { return step_; }

 private:
  std::uint64_t step_;
};

/// Evaluates g_adv + λ_re·recon + λ_Gau·gau for fixed latents `z` and real
/// batch `x`, adding its gradients to the G and F gradient buffers. D and
/// Dz are read but their gradients are left untouched.
StepReport generator_backward(TrainerState& state, const TrainConfig& cfg, const Matrix& z,
                              const Matrix& x);

/// One alternating update: discriminator, then (ZDisc) latent
/// discriminator, then G and F jointly on the combined objective.
StepReport train_step(TrainerState& state, const TrainConfig& cfg, const Matrix& real_batch);

/// Called with the state at step 0, at every multiple of eval_every, and at
/// the final step.
using TrainSink = std::function<void(const TrainerState&)>;

TrainerState train(const TrainConfig& cfg, const TrainSink& sink = {});

/// Continue an existing state until state.step == cfg.steps.
void train_from(TrainerState& state, const TrainConfig& cfg, const TrainSink& sink = {},
                const std::function<void(const StepReport&)>& on_step = {});

// ---- checkpoints --------------------------------------------------------------

inline constexpr int kCheckpointSchema = 1;

/// Writes G.json, F.json, D.json (and Dz.json), one optimizer file per
/// network, and manifest.json {schema_version, step, config, rng_state,
/// networks, optimizers} into `dir`. Returns the manifest path.
std::filesystem::path save_checkpoint(const std::filesystem::path& dir, const TrainerState& state,
                                      const TrainConfig& cfg);

struct LoadedCheckpoint {
  TrainerState state;
  TrainConfig config;
};

/// Throws CheckpointError on any schema violation.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& manifest);

}  // namespace iidgan

#pragma once

#include <cstdint>
#include <vector>

#include "iidgan/matrix.hpp"
#include "iidgan/rng.hpp"
#include "iidgan/synthdata.hpp"
#include "iidgan/training.hpp"

namespace iidgan {

inline constexpr int kBadMode = -1;

struct ModeAssignment {
  std::vector<int> labels;             // mode index or kBadMode
  std::vector<std::uint64_t> counts;   // valid samples per mode
  std::uint64_t bad = 0;

  std::uint64_t total() const;
};

/// Nearest center when within radius_factor·std, else Bad.
ModeAssignment assign_modes(const Matrix& samples, const GaussianMixture& mix,
                            double radius_factor = 3.0);

/// Valid samples over all samples.
double quality(const ModeAssignment& a);

/// Σ p_i ln(p_i·m) with p_i = count_i / total (Bad included in the total).
double reverse_kl(const ModeAssignment& a, std::size_t mode_count);

/// Modes holding at least `min_count` valid samples.
std::size_t modes_covered(const ModeAssignment& a, std::uint64_t min_count = 1);

struct MetricsReport {
  std::size_t modes_covered = 0;
  double quality = 0.0;
  double reverse_kl = 0.0;
  std::vector<double> sw_per_dim;
  std::vector<double> ks_per_dim;

  double sw_mean() const;
};

struct EvalOptions {
  std::size_t n_gen = 50000;
  std::size_t n_real = 500;
  double radius_factor = 3.0;
  std::uint64_t min_count = 1;
};

/// Per-dimension SW (at most 5000 leading samples) and KS of `inverse`.
void iid_statistics(const Matrix& inverse, std::vector<double>& sw, std::vector<double>& ks);

MetricsReport evaluate(const TrainerState& state, const GaussianMixture& mix,
                       const EvalOptions& opts, Rng& rng);

/// Real samples pushed through F, n×latent_dim.
Matrix inverse_samples(const TrainerState& state, const GaussianMixture& mix, std::size_t n,
                       Rng& rng);

/// G applied to n standard-normal latents, generated in chunks.
Matrix generate(const Mlp& g, std::size_t n, std::size_t latent_dim, Rng& rng);

}  // namespace iidgan

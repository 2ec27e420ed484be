#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iidgan/matrix.hpp"

namespace iidgan {

/// Probabilities are clamped to [kProbClamp, 1 − kProbClamp] before taking
/// logs; clamped entries receive zero gradient.
inline constexpr double kProbClamp = 1e-7;

// ---- adversarial terms ----------------------------------------------------

struct BinaryLoss {
  double value = 0.0;
  std::vector<double> grad_real;   // d value / d (real-side probability)
  std::vector<double> grad_fake;   // d value / d (fake-side probability)
};

struct ScalarLoss {
  double value = 0.0;
  std::vector<double> grad;
};

/// −mean(log d_real) − mean(log(1 − d_fake)).
BinaryLoss d_loss(std::span<const double> d_real, std::span<const double> d_fake);

/// Non-saturating generator loss −mean(log d_fake).
ScalarLoss g_adv_loss(std::span<const double> d_fake);

/// Latent-discriminator pair: dz_loss has the d_loss form on
/// (true Gaussian draws, F(x)); f_adv has the g_adv_loss form on F(x).
struct ZDiscLosses {
  BinaryLoss dz;
  ScalarLoss f_adv;
};
ZDiscLosses zdisc_losses(std::span<const double> dz_real, std::span<const double> dz_fake);

// ---- cycle consistency ----------------------------------------------------

struct ReconLoss {
  double value = 0.0;
  Matrix grad_z_cycled;
  Matrix grad_x_cycled;
};

/// mean‖z − F(G(z))‖₁ + dim_ratio · mean‖x − G(F(x))‖₁.
ReconLoss recon_loss(const Matrix& z, const Matrix& z_cycled, const Matrix& x,
                     const Matrix& x_cycled, double dim_ratio);

// ---- Gaussian fit of the inverse batch ------------------------------------

enum class EstimateKind { Full, Diagonal };

struct GaussianEstimate {
  EstimateKind kind = EstimateKind::Full;
  std::vector<double> mean;
  Matrix cov;                    // Full
  std::vector<double> diag_std;  // Diagonal

  std::size_t dim() const { return mean.size(); }
};

/// Gradient of a scalar with respect to the fields of a GaussianEstimate.
struct EstimateGrad {
  std::vector<double> mean;
  Matrix cov;
  std::vector<double> diag_std;
};

struct EstimateLoss {
  double value = 0.0;
  EstimateGrad grad;
};

/// Batch mean and biased (divisor N) covariance, or the per-dimension MLE
/// standard deviations for the Diagonal kind. Requires N ≥ 2.
GaussianEstimate gaussian_mle(const Matrix& z_batch, EstimateKind kind);

/// Pull an EstimateGrad back onto the batch rows.
Matrix gaussian_mle_backward(const Matrix& z_batch, const GaussianEstimate& est,
                             const EstimateGrad& grad);

/// ‖μ‖² + tr(Σ + I − 2Σ^{1/2}).
EstimateLoss w2_md_loss(const GaussianEstimate& est);

/// Σ_m μ_m² + (σ_m − 1)².
EstimateLoss w2_1d_loss(const GaussianEstimate& est);

/// ‖μ‖_p + ‖Σ − I‖_p with the entrywise p-norm for the matrix; p ≥ 1.
EstimateLoss pnorm_loss(const GaussianEstimate& est, double p);

/// KL(N(0, I) ‖ N(μ, Σ)) = ½{log det Σ − M + tr Σ⁻¹ + μᵀΣ⁻¹μ}. Adds 1e−6·I
/// when the smallest eigenvalue of Σ is ≤ 1e−8.
EstimateLoss kl_loss(const GaussianEstimate& est);

// ---- Gaussian-consistency dispatch -----------------------------------------

enum class GauVariant { W2_MD, W2_1D, PNorm, KL, ZDisc, None };

std::string gau_variant_name(GauVariant v);
GauVariant parse_gau_variant(std::string_view name);

struct BatchLoss {
  double value = 0.0;
  Matrix grad;  // d value / d batch
};

/// Fit the batch and apply one of the statistic-based variants (not ZDisc,
/// which needs a network). None yields value 0 and a zero gradient.
BatchLoss gaussian_consistency(const Matrix& inverse_batch, GauVariant variant, double p = 2.0);

// ---- combined objective -----------------------------------------------------

struct LossWeights {
  double lambda_re = 1.0;
  double lambda_gau = 1.0;
  double dim_ratio = 1.0;   // target dim / latent dim
};

LossWeights make_loss_weights(double lambda_re, double lambda_gau, std::size_t target_dim,
                              std::size_t latent_dim);

/// adv + λ_re · recon + λ_Gau · gau.
double total_objective(double adv, double recon, double gau, const LossWeights& w);

}  // namespace iidgan

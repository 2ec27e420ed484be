#include "iidgan/losses.hpp"

#include <algorithm>
#include <cmath>

#include "iidgan/error.hpp"
#include "iidgan/linalg.hpp"

namespace iidgan {
namespace {

constexpr double kKlMinEigen = 1e-8;
constexpr double kKlRidge = 1e-6;

bool clamped(double p) { return p < kProbClamp || p > 1.0 - kProbClamp; }
double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

void require_nonempty(std::span<const double> v, const char* what) {
  if (v.empty()) throw DomainError(std::string(what) + ": empty batch");
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// ‖v‖_p and its gradient; the gradient is zero at v = 0.
double pnorm(std::span<const double> v, double p, std::span<double> grad) {
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p);
  const double norm = std::pow(s, 1.0 / p);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (norm == 0.0) {
      grad[i] = 0.0;
    } else if (p == 1.0) {
      grad[i] = sign(v[i]);
    } else {
      grad[i] = sign(v[i]) * std::pow(std::abs(v[i]) / norm, p - 1.0);
    }
  }
  return norm;
}

void require_full(const GaussianEstimate& est, const char* what) {
  if (est.kind != EstimateKind::Full || est.cov.rows() != est.dim() || est.cov.cols() != est.dim())
    throw DomainError(std::string(what) + ": needs a full-covariance estimate");
}

Matrix mul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t p = 0; p < a.cols(); ++p)
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += a(i, p) * b(p, j);
  return c;
}

}  // namespace

BinaryLoss d_loss(std::span<const double> d_real, std::span<const double> d_fake) {
  require_nonempty(d_real, "d_loss");
  require_nonempty(d_fake, "d_loss");
  BinaryLoss out;
  out.grad_real.resize(d_real.size());
  out.grad_fake.resize(d_fake.size());
  const double nr = static_cast<double>(d_real.size());
  const double nf = static_cast<double>(d_fake.size());
  double sr = 0.0;
  double sf = 0.0;
  for (std::size_t i = 0; i < d_real.size(); ++i) {
    const double p = clamp_prob(d_real[i]);
    sr += std::log(p);
    out.grad_real[i] = clamped(d_real[i]) ? 0.0 : -1.0 / (nr * p);
  }
  for (std::size_t i = 0; i < d_fake.size(); ++i) {
    const double p = clamp_prob(d_fake[i]);
    sf += std::log(1.0 - p);
    out.grad_fake[i] = clamped(d_fake[i]) ? 0.0 : 1.0 / (nf * (1.0 - p));
  }
  out.value = -sr / nr - sf / nf;
  return out;
}

ScalarLoss g_adv_loss(std::span<const double> d_fake) {
  require_nonempty(d_fake, "g_adv_loss");
  ScalarLoss out;
  out.grad.resize(d_fake.size());
  const double n = static_cast<double>(d_fake.size());
  double s = 0.0;
  for (std::size_t i = 0; i < d_fake.size(); ++i) {
    const double p = clamp_prob(d_fake[i]);
    s += std::log(p);
    out.grad[i] = clamped(d_fake[i]) ? 0.0 : -1.0 / (n * p);
  }
  out.value = -s / n;
  return out;
}

ZDiscLosses zdisc_losses(std::span<const double> dz_real, std::span<const double> dz_fake) {
  return {d_loss(dz_real, dz_fake), g_adv_loss(dz_fake)};
}

ReconLoss recon_loss(const Matrix& z, const Matrix& z_cycled, const Matrix& x,
                     const Matrix& x_cycled, double dim_ratio) {
  if (z.rows() != z_cycled.rows() || z.cols() != z_cycled.cols() || x.rows() != x_cycled.rows() ||
      x.cols() != x_cycled.cols())
    throw ShapeError("recon_loss: shape mismatch");
  if (z.rows() == 0 || x.rows() == 0) throw DomainError("recon_loss: empty batch");
  ReconLoss out;
  out.grad_z_cycled = Matrix(z.rows(), z.cols());
  out.grad_x_cycled = Matrix(x.rows(), x.cols());
  const double nz = static_cast<double>(z.rows());
  const double nx = static_cast<double>(x.rows());
  double sz = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double d = z_cycled.data()[i] - z.data()[i];
    sz += std::abs(d);
    out.grad_z_cycled.data()[i] = sign(d) / nz;
  }
  double sx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x_cycled.data()[i] - x.data()[i];
    sx += std::abs(d);
    out.grad_x_cycled.data()[i] = dim_ratio * sign(d) / nx;
  }
  out.value = sz / nz + dim_ratio * sx / nx;
  return out;
}

GaussianEstimate gaussian_mle(const Matrix& z, EstimateKind kind) {
  if (z.rows() < 2) throw DomainError("gaussian_mle: need at least 2 samples");
  const std::size_t n = z.rows();
  const std::size_t m = z.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  GaussianEstimate est;
  est.kind = kind;
  est.mean.assign(m, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k) est.mean[k] += z(i, k);
  for (double& v : est.mean) v *= inv_n;

  if (kind == EstimateKind::Full) {
    est.cov = Matrix(m, m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < m; ++a) {
        const double ca = z(i, a) - est.mean[a];
        for (std::size_t b = a; b < m; ++b) est.cov(a, b) += ca * (z(i, b) - est.mean[b]);
      }
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a; b < m; ++b) {
        est.cov(a, b) *= inv_n;
        est.cov(b, a) = est.cov(a, b);
      }
  } else {
    est.diag_std.assign(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < m; ++k) {
        const double c = z(i, k) - est.mean[k];
        est.diag_std[k] += c * c;
      }
    for (double& v : est.diag_std) v = std::sqrt(v * inv_n);
  }
  return est;
}

Matrix gaussian_mle_backward(const Matrix& z, const GaussianEstimate& est,
                             const EstimateGrad& grad) {
  const std::size_t n = z.rows();
  const std::size_t m = z.cols();
  if (est.dim() != m || grad.mean.size() != m) throw ShapeError("gaussian_mle_backward: dims");
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix out(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k) out(i, k) = grad.mean[k] * inv_n;

  // The centring term contributes nothing because the centred rows sum to 0.
  if (est.kind == EstimateKind::Full) {
    if (grad.cov.rows() != m || grad.cov.cols() != m) throw ShapeError("gaussian_mle_backward: cov");
    Matrix sym(m, m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) sym(a, b) = grad.cov(a, b) + grad.cov(b, a);
    std::vector<double> c(m);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < m; ++k) c[k] = z(i, k) - est.mean[k];
      for (std::size_t a = 0; a < m; ++a) {
        double s = 0.0;
        for (std::size_t b = 0; b < m; ++b) s += sym(a, b) * c[b];
        out(i, a) += inv_n * s;
      }
    }
  } else {
    if (grad.diag_std.size() != m) throw ShapeError("gaussian_mle_backward: diag_std");
    for (std::size_t k = 0; k < m; ++k) {
      const double sd = est.diag_std[k];
      if (sd == 0.0) continue;
      const double scale = grad.diag_std[k] * inv_n / sd;
      for (std::size_t i = 0; i < n; ++i) out(i, k) += scale * (z(i, k) - est.mean[k]);
    }
  }
  return out;
}

EstimateLoss w2_md_loss(const GaussianEstimate& est) {
  require_full(est, "w2_md_loss");
  const std::size_t m = est.dim();
  const PsdSqrt root = sqrt_psd_decomposed(est.cov);
  EstimateLoss out;
  double mu2 = 0.0;
  out.grad.mean.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    mu2 += est.mean[k] * est.mean[k];
    out.grad.mean[k] = 2.0 * est.mean[k];
  }
  out.value = mu2 + trace(est.cov) + static_cast<double>(m) - 2.0 * trace(root.root);
  // d/dΣ [tr Σ − 2 tr Σ^{1/2}] = I − 2·(∂ tr R/∂Σ)
  Matrix d_tr = sqrt_psd_backward(root, Matrix::identity(m));
  out.grad.cov = Matrix::identity(m) - 2.0 * d_tr;
  return out;
}

EstimateLoss w2_1d_loss(const GaussianEstimate& est) {
  if (est.kind != EstimateKind::Diagonal || est.diag_std.size() != est.dim())
    throw DomainError("w2_1d_loss: needs a diagonal estimate");
  EstimateLoss out;
  const std::size_t m = est.dim();
  out.grad.mean.resize(m);
  out.grad.diag_std.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double mu = est.mean[k];
    const double ds = est.diag_std[k] - 1.0;
    out.value += mu * mu + ds * ds;
    out.grad.mean[k] = 2.0 * mu;
    out.grad.diag_std[k] = 2.0 * ds;
  }
  return out;
}

EstimateLoss pnorm_loss(const GaussianEstimate& est, double p) {
  if (!(p >= 1.0)) throw DomainError("pnorm_loss: p must be >= 1");
  require_full(est, "pnorm_loss");
  const std::size_t m = est.dim();
  EstimateLoss out;
  out.grad.mean.resize(m);
  const double mean_norm = pnorm(est.mean, p, out.grad.mean);
  Matrix diff = est.cov - Matrix::identity(m);
  out.grad.cov = Matrix(m, m);
  const double cov_norm = pnorm(diff.values(), p, out.grad.cov.values());
  out.value = mean_norm + cov_norm;
  return out;
}

EstimateLoss kl_loss(const GaussianEstimate& est) {
  require_full(est, "kl_loss");
  const std::size_t m = est.dim();
  SymmetricEigen eig = jacobi_eigen(est.cov);
  double ridge = 0.0;
  if (eig.values.front() <= kKlMinEigen) ridge = kKlRidge;
  std::vector<double> inv(m);
  double logdet = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double lam = eig.values[k] + ridge;
    if (!(lam > 0.0)) throw DomainError("kl_loss: covariance is singular after regularisation");
    logdet += std::log(lam);
    inv[k] = 1.0 / lam;
  }
  const Matrix sinv = reconstruct(eig, inv);
  std::vector<double> sinv_mu(m, 0.0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) sinv_mu[a] += sinv(a, b) * est.mean[b];
  double quad = 0.0;
  for (std::size_t a = 0; a < m; ++a) quad += est.mean[a] * sinv_mu[a];

  EstimateLoss out;
  out.value = 0.5 * (logdet - static_cast<double>(m) + trace(sinv) + quad);
  out.grad.mean = sinv_mu;
  const Matrix sinv2 = mul(sinv, sinv);
  out.grad.cov = Matrix(m, m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      out.grad.cov(a, b) = 0.5 * (sinv(a, b) - sinv2(a, b) - sinv_mu[a] * sinv_mu[b]);
  return out;
}

std::string gau_variant_name(GauVariant v) {
  switch (v) {
    case GauVariant::W2_MD: return "w2_md";
    case GauVariant::W2_1D: return "w2_1d";
    case GauVariant::PNorm: return "pnorm";
    case GauVariant::KL: return "kl";
    case GauVariant::ZDisc: return "zdisc";
    case GauVariant::None: return "none";
  }
  return "none";
}

GauVariant parse_gau_variant(std::string_view name) {
  for (GauVariant v : {GauVariant::W2_MD, GauVariant::W2_1D, GauVariant::PNorm, GauVariant::KL,
                       GauVariant::ZDisc, GauVariant::None})
    if (gau_variant_name(v) == name) return v;
  throw DomainError("unknown Gaussian-consistency variant '" + std::string(name) + "'");
}

BatchLoss gaussian_consistency(const Matrix& batch, GauVariant variant, double p) {
  BatchLoss out;
  if (variant == GauVariant::None) {
    out.grad = Matrix(batch.rows(), batch.cols());
    return out;
  }
  if (variant == GauVariant::ZDisc)
    throw DomainError("gaussian_consistency: the zdisc variant needs a latent discriminator");
  const EstimateKind kind = variant == GauVariant::W2_1D ? EstimateKind::Diagonal : EstimateKind::Full;
  const GaussianEstimate est = gaussian_mle(batch, kind);
  EstimateLoss l;
  switch (variant) {
    case GauVariant::W2_MD: l = w2_md_loss(est); break;
    case GauVariant::W2_1D: l = w2_1d_loss(est); break;
    case GauVariant::PNorm: l = pnorm_loss(est, p); break;
    case GauVariant::KL: l = kl_loss(est); break;
    default: break;
  }
  out.value = l.value;
  out.grad = gaussian_mle_backward(batch, est, l.grad);
  return out;
}

LossWeights make_loss_weights(double lambda_re, double lambda_gau, std::size_t target_dim,
                              std::size_t latent_dim) {
  if (lambda_re < 0.0 || lambda_gau < 0.0) throw DomainError("loss weights must be >= 0");
  if (latent_dim == 0) throw DomainError("latent dimension must be > 0");
  return {lambda_re, lambda_gau, static_cast<double>(target_dim) / static_cast<double>(latent_dim)};
}

double total_objective(double adv, double recon, double gau, const LossWeights& w) {
  return adv + w.lambda_re * recon + w.lambda_gau * gau;
}

}  // namespace iidgan

#include <doctest.h>

#include <cmath>
#include <functional>

#include "iidgan/error.hpp"
#include "iidgan/linalg.hpp"
#include "iidgan/losses.hpp"
#include "iidgan/synthdata.hpp"
#include "test_util.hpp"

using namespace iidgan;

namespace {

// Central-difference check of d value / d batch for a batch-level loss.
void check_batch_gradient(const std::function<BatchLoss(const Matrix&)>& f, const Matrix& x,
                          double tol) {
  const BatchLoss base = f(x);
  const double h = 1e-6;
  for (std::size_t k = 0; k < x.size(); ++k) {
    Matrix xp = x, xm = x;
    xp.data()[k] += h;
    xm.data()[k] -= h;
    const double fd = (f(xp).value - f(xm).value) / (2 * h);
    INFO("entry ", k);
    CHECK(test_util::rel_err(base.grad.data()[k], fd) < tol);
  }
}

GaussianEstimate full(std::vector<double> mu, Matrix cov) {
  GaussianEstimate e;
  e.kind = EstimateKind::Full;
  e.mean = std::move(mu);
  e.cov = std::move(cov);
  return e;
}

}  // namespace

TEST_CASE("d_loss and g_adv_loss values") {
  const std::vector<double> real{0.9, 0.8};
  const std::vector<double> fake{0.1, 0.3};
  const auto d = d_loss(real, fake);
  const double expect =
      -(std::log(0.9) + std::log(0.8)) / 2 - (std::log(0.9) + std::log(0.7)) / 2;
  CHECK(d.value == doctest::Approx(expect).epsilon(1e-14));
  CHECK(d.grad_real[0] == doctest::Approx(-1.0 / (2 * 0.9)));
  CHECK(d.grad_fake[1] == doctest::Approx(1.0 / (2 * 0.7)));
  const auto g = g_adv_loss(fake);
  CHECK(g.value == doctest::Approx(-(std::log(0.1) + std::log(0.3)) / 2));
  CHECK(g.grad[0] == doctest::Approx(-1.0 / (2 * 0.1)));
}

TEST_CASE("probability clamp keeps losses finite and zeroes clamped gradients") {
  const std::vector<double> zero{0.0, 0.5};
  const std::vector<double> one{1.0, 0.5};
  const auto d = d_loss(zero, one);
  CHECK(std::isfinite(d.value));
  CHECK(d.value == doctest::Approx((-std::log(kProbClamp) - std::log(0.5)) / 2 * 2));
  CHECK(d.grad_real[0] == 0.0);
  CHECK(d.grad_fake[0] == 0.0);
  CHECK(d.grad_real[1] != 0.0);
  const auto g = g_adv_loss(zero);
  CHECK(std::isfinite(g.value));
  CHECK(g.grad[0] == 0.0);
  CHECK_THROWS_AS(d_loss({}, one), DomainError);
}

TEST_CASE("adversarial gradients against finite differences") {
  Rng rng(3);
  std::vector<double> r(7), f(5);
  for (auto& v : r) v = 0.05 + 0.9 * rng.uniform();
  for (auto& v : f) v = 0.05 + 0.9 * rng.uniform();
  const auto d = d_loss(r, f);
  const auto g = g_adv_loss(f);
  const double h = 1e-7;
  for (std::size_t i = 0; i < r.size(); ++i) {
    auto rp = r, rm = r;
    rp[i] += h;
    rm[i] -= h;
    CHECK(test_util::rel_err(d.grad_real[i], (d_loss(rp, f).value - d_loss(rm, f).value) / (2 * h)) <
          1e-6);
  }
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto fp = f, fm = f;
    fp[i] += h;
    fm[i] -= h;
    CHECK(test_util::rel_err(d.grad_fake[i], (d_loss(r, fp).value - d_loss(r, fm).value) / (2 * h)) <
          1e-6);
    CHECK(test_util::rel_err(g.grad[i], (g_adv_loss(fp).value - g_adv_loss(fm).value) / (2 * h)) <
          1e-6);
  }
  const auto zd = zdisc_losses(r, f);
  CHECK(zd.dz.value == d.value);
  CHECK(zd.f_adv.value == g.value);
}

TEST_CASE("recon_loss is the L1 cycle loss with dimension ratio") {
  const Matrix z{{0, 0}, {1, 1}};
  const Matrix zc{{0.5, -0.5}, {1, 2}};
  const Matrix x{{1, 1, 1}};
  const Matrix xc{{0, 1, 3}};
  const auto r = recon_loss(z, zc, x, xc, 1.5);
  CHECK(r.value == doctest::Approx((1.0 + 1.0) / 2 + 1.5 * 3.0));
  CHECK(r.grad_z_cycled(0, 1) == -0.5);
  CHECK(r.grad_x_cycled(0, 2) == 1.5);
  CHECK(r.grad_x_cycled(0, 1) == 0.0);
  CHECK_THROWS_AS(recon_loss(z, x, x, xc, 1.0), ShapeError);
}

TEST_CASE("gaussian_mle uses the biased estimator") {
  const Matrix z{{1, 0}, {3, 2}, {2, 4}};
  const auto e = gaussian_mle(z, EstimateKind::Full);
  CHECK(e.mean[0] == doctest::Approx(2.0));
  CHECK(e.mean[1] == doctest::Approx(2.0));
  CHECK(e.cov(0, 0) == doctest::Approx(2.0 / 3));
  CHECK(e.cov(1, 1) == doctest::Approx(8.0 / 3));
  CHECK(e.cov(0, 1) == doctest::Approx(2.0 / 3));
  CHECK(e.cov(1, 0) == e.cov(0, 1));
  const auto d = gaussian_mle(z, EstimateKind::Diagonal);
  CHECK(d.diag_std[1] == doctest::Approx(std::sqrt(8.0 / 3)));
  CHECK_THROWS_AS(gaussian_mle(Matrix{{1, 2}}, EstimateKind::Full), DomainError);
}

TEST_CASE("estimate losses vanish at the standard Gaussian") {
  const auto e = full({0, 0, 0}, Matrix::identity(3));
  CHECK(std::abs(w2_md_loss(e).value) < 1e-14);
  CHECK(std::abs(kl_loss(e).value) < 1e-14);
  CHECK(pnorm_loss(e, 2.0).value == 0.0);
  GaussianEstimate d;
  d.kind = EstimateKind::Diagonal;
  d.mean = {0, 0};
  d.diag_std = {1, 1};
  CHECK(w2_1d_loss(d).value == 0.0);
}

TEST_CASE("closed-form values") {
  // W2² between N(μ, diag(4, 9)) and N(0, I) is ‖μ‖² + (2−1)² + (3−1)².
  const auto e = full({1, -2}, Matrix{{4, 0}, {0, 9}});
  CHECK(w2_md_loss(e).value == doctest::Approx(5.0 + 1.0 + 4.0));
  // KL(N(0,I) || N(μ, Σ)) with Σ = diag(4, 9).
  const double kl = 0.5 * (std::log(36.0) - 2 + (0.25 + 1.0 / 9) + (1.0 / 4 + 4.0 / 9));
  CHECK(kl_loss(e).value == doctest::Approx(kl).epsilon(1e-13));
  // ‖μ‖₂ + ‖Σ − I‖_F.
  CHECK(pnorm_loss(e, 2.0).value == doctest::Approx(std::sqrt(5.0) + std::sqrt(9.0 + 64.0)));
  CHECK(pnorm_loss(e, 1.0).value == doctest::Approx(3.0 + 11.0));
  CHECK_THROWS_AS(pnorm_loss(e, 0.5), DomainError);
}

TEST_CASE("KL ridge on singular covariance") {
  const auto e = full({0, 0}, Matrix{{1, 0}, {0, 0}});
  const auto l = kl_loss(e);
  CHECK(std::isfinite(l.value));
  CHECK(l.value == doctest::Approx(0.5 * (std::log(1.000001) + std::log(1e-6) - 2 +
                                          1 / 1.000001 + 1e6)));
}

TEST_CASE("wrong estimate kinds are rejected") {
  GaussianEstimate d;
  d.kind = EstimateKind::Diagonal;
  d.mean = {0};
  d.diag_std = {1};
  CHECK_THROWS_AS(w2_md_loss(d), DomainError);
  CHECK_THROWS_AS(kl_loss(d), DomainError);
  CHECK_THROWS_AS(w2_1d_loss(full({0}, Matrix{{1}})), DomainError);
}

TEST_CASE("batch gradients of every statistic-based variant") {
  Rng rng(31);
  for (int rep = 0; rep < 5; ++rep) {
    Matrix x = test_util::random_matrix(9, 3, rng, 1.5);
    for (auto v : {GauVariant::W2_MD, GauVariant::W2_1D, GauVariant::KL}) {
      INFO(gau_variant_name(v));
      check_batch_gradient([&](const Matrix& b) { return gaussian_consistency(b, v); }, x, 1e-5);
    }
    for (double p : {1.5, 2.0, 3.0}) {
      INFO("pnorm p=", p);
      check_batch_gradient(
          [&](const Matrix& b) { return gaussian_consistency(b, GauVariant::PNorm, p); }, x, 1e-5);
    }
  }
}

TEST_CASE("variant dispatch") {
  const Matrix x{{1, 2}, {3, 5}, {0, 1}};
  const auto none = gaussian_consistency(x, GauVariant::None);
  CHECK(none.value == 0.0);
  CHECK(max_abs(none.grad) == 0.0);
  CHECK_THROWS_AS(gaussian_consistency(x, GauVariant::ZDisc), DomainError);
  for (auto v : {GauVariant::W2_MD, GauVariant::W2_1D, GauVariant::PNorm, GauVariant::KL,
                 GauVariant::ZDisc, GauVariant::None})
    CHECK(parse_gau_variant(gau_variant_name(v)) == v);
  CHECK_THROWS_AS(parse_gau_variant("mmd"), DomainError);
}

TEST_CASE("combined objective") {
  const auto w = make_loss_weights(2.0, 0.5, 2, 4);
  CHECK(w.dim_ratio == 0.5);
  CHECK(total_objective(1.0, 3.0, 4.0, w) == 1.0 + 6.0 + 2.0);
  CHECK_THROWS_AS(make_loss_weights(-1.0, 1.0, 2, 2), DomainError);
}

TEST_CASE("adversarial examples") {
  const std::vector<double> half(4, 0.5), ones(4, 1.0), zeros(4, 0.0);
  CHECK(d_loss(half, half).value == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(d_loss(ones, zeros).value < 1e-6);
  CHECK(g_adv_loss(ones).value < 1e-6);
  CHECK(g_adv_loss(half).value == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(zdisc_losses(half, half).f_adv.value == doctest::Approx(std::log(2.0)));
  std::vector<double> p{0.2, 0.4, 0.6};
  const double base = g_adv_loss(p).value;
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto q = p;
    q[i] += 0.1;
    CHECK(g_adv_loss(q).value < base);
  }
}

TEST_CASE("recon examples") {
  const Matrix z{{0, 0}, {1, -1}, {2, 2}};
  Matrix zc = z;
  for (std::size_t i = 0; i < 3; ++i) zc(i, 0) += 1.0;
  CHECK(recon_loss(z, z, z, z, 1.0).value == 0.0);
  CHECK(recon_loss(z, zc, z, z, 1.0).value == 1.0);
  CHECK(recon_loss(zc, z, zc, z, 2.0).value == 1.0 + 2.0 * 1.0);
}

TEST_CASE("gaussian_mle examples and properties") {
  const auto e = gaussian_mle(Matrix{{1, 1}, {-1, -1}}, EstimateKind::Full);
  CHECK(e.mean == std::vector<double>{0, 0});
  CHECK(e.cov == Matrix{{1, 1}, {1, 1}});

  Rng rng(17);
  const Matrix big = sample_standard_normal(100000, 3, rng);
  const auto g = gaussian_mle(big, EstimateKind::Full);
  for (std::size_t a = 0; a < 3; ++a) {
    CHECK(std::abs(g.mean[a]) < 0.02);
    for (std::size_t b = 0; b < 3; ++b) CHECK(std::abs(g.cov(a, b) - (a == b)) < 0.03);
  }

  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t m = 1 + rng.below(5);
    const Matrix z = test_util::random_matrix(2 + rng.below(20), m, rng, 3.0);
    const auto f = gaussian_mle(z, EstimateKind::Full);
    const auto d = gaussian_mle(z, EstimateKind::Diagonal);
    CHECK(frobenius_norm(f.cov - f.cov.transposed()) <= 1e-12);
    CHECK(jacobi_eigen(f.cov).values.front() >= -1e-10);
    for (std::size_t k = 0; k < m; ++k) {
      CHECK(d.diag_std[k] >= 0.0);
      CHECK(d.diag_std[k] * d.diag_std[k] == doctest::Approx(f.cov(k, k)).epsilon(1e-12));
    }
    Matrix shifted = z;
    std::vector<double> c(m);
    for (auto& v : c) v = 10.0 * rng.uniform() - 5.0;
    for (std::size_t i = 0; i < z.rows(); ++i)
      for (std::size_t k = 0; k < m; ++k) shifted(i, k) += c[k];
    const auto s = gaussian_mle(shifted, EstimateKind::Full);
    for (std::size_t k = 0; k < m; ++k) CHECK(s.mean[k] == doctest::Approx(f.mean[k] + c[k]));
    CHECK(frobenius_norm(s.cov - f.cov) < 1e-9 * std::max(1.0, frobenius_norm(f.cov)));
  }
}

TEST_CASE("estimate loss examples") {
  CHECK(w2_md_loss(full({1, 0}, Matrix::identity(2))).value == doctest::Approx(1.0));
  CHECK(w2_md_loss(full({0, 0}, 4.0 * Matrix::identity(2))).value == doctest::Approx(2.0));
  GaussianEstimate d;
  d.kind = EstimateKind::Diagonal;
  d.mean = {0.5};
  d.diag_std = {1.5};
  CHECK(w2_1d_loss(d).value == doctest::Approx(0.5));
  CHECK(pnorm_loss(full({1, -1}, Matrix::identity(2)), 1.0).value == doctest::Approx(2.0));
  CHECK(pnorm_loss(full({0, 0}, Matrix{{2, 0}, {0, 1}}), 2.0).value == doctest::Approx(1.0));
  CHECK(kl_loss(full({0}, Matrix{{std::exp(1.0)}})).value ==
        doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("estimate losses are non-negative and w2_md matches w2_1d on diagonals up to M = 8") {
  Rng rng(23);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t m = 1 + rng.below(8);
    GaussianEstimate f, d;
    f.kind = EstimateKind::Full;
    d.kind = EstimateKind::Diagonal;
    f.cov = Matrix(m, m);
    for (std::size_t k = 0; k < m; ++k) {
      const double mu = rng.uniform() - 0.5;
      const double sd = 0.05 + 2.0 * rng.uniform();
      f.mean.push_back(mu);
      d.mean.push_back(mu);
      f.cov(k, k) = sd * sd;
      d.diag_std.push_back(sd);
    }
    CHECK(std::abs(w2_md_loss(f).value - w2_1d_loss(d).value) < 1e-10);
    const auto g = full(f.mean, test_util::random_spd(m, rng, 0.01));
    CHECK(w2_md_loss(g).value >= 0.0);
    CHECK(pnorm_loss(g, 1.0 + rng.uniform() * 3).value >= 0.0);
    CHECK(kl_loss(g).value >= 0.0);
  }
}

TEST_CASE("objective examples") {
  const auto w0 = make_loss_weights(0.0, 0.0, 2, 2);
  CHECK(total_objective(0.7, 5.0, 9.0, w0) == 0.7);
  const auto w1 = make_loss_weights(1.0, 1.0, 2, 2);
  CHECK(w1.dim_ratio == 1.0);
  CHECK(total_objective(0.5, 0.2, 0.3, w1) == doctest::Approx(1.0));
}

#include "iidgan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "iidgan/error.hpp"
#include "iidgan/stats.hpp"

namespace iidgan {

namespace {

constexpr std::size_t kChunk = 4096;
constexpr std::size_t kMaxShapiroWilk = 5000;

}  // namespace

std::uint64_t ModeAssignment::total() const { return labels.size(); }

ModeAssignment assign_modes(const Matrix& samples, const GaussianMixture& mix,
                            double radius_factor) {
  validate(mix);
  if (samples.cols() != 2) throw ShapeError("assign_modes: samples must be n×2");
  ModeAssignment a;
  a.labels.resize(samples.rows(), kBadMode);
  a.counts.assign(mix.centers.size(), 0);
  const double radius = radius_factor * mix.std;
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    const double x = samples(i, 0);
    const double y = samples(i, 1);
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t k = 0; k < mix.centers.size(); ++k) {
      const double dx = x - mix.centers[k][0];
      const double dy = y - mix.centers[k][1];
      const double d2 = dx * dx + dy * dy;
      if (d2 < best) {
        best = d2;
        arg = k;
      }
    }
    if (best <= r2) {
      a.labels[i] = static_cast<int>(arg);
      ++a.counts[arg];
    } else {
      ++a.bad;
    }
  }
  return a;
}

double quality(const ModeAssignment& a) {
  const auto n = a.total();
  if (n == 0) return 0.0;
  return static_cast<double>(n - a.bad) / static_cast<double>(n);
}

double reverse_kl(const ModeAssignment& a, std::size_t mode_count) {
  if (mode_count == 0) throw DomainError("reverse_kl: mode_count must be >= 1");
  const double n = static_cast<double>(a.total());
  if (n == 0.0) return 0.0;
  const double m = static_cast<double>(mode_count);
  double kl = 0.0;
  for (auto c : a.counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    kl += p * std::log(p * m);
  }
  return kl;
}

std::size_t modes_covered(const ModeAssignment& a, std::uint64_t min_count) {
  const std::uint64_t threshold = std::max<std::uint64_t>(min_count, 1);
  return static_cast<std::size_t>(
      std::count_if(a.counts.begin(), a.counts.end(), [&](auto c) { return c >= threshold; }));
}

double MetricsReport::sw_mean() const { return mean(sw_per_dim); }

Matrix generate(const Mlp& g, std::size_t n, std::size_t latent_dim, Rng& rng) {
  Matrix out(n, g.output_size());
  for (std::size_t begin = 0; begin < n; begin += kChunk) {
    const std::size_t len = std::min(kChunk, n - begin);
    const Matrix part = g.predict(sample_standard_normal(len, latent_dim, rng));
    std::copy(part.values().begin(), part.values().end(), out.row(begin).begin());
  }
  return out;
}

Matrix inverse_samples(const TrainerState& state, const GaussianMixture& mix, std::size_t n,
                       Rng& rng) {
  return state.f.predict(sample_mixture(mix, n, rng));
}

void iid_statistics(const Matrix& inverse, std::vector<double>& sw, std::vector<double>& ks) {
  sw.clear();
  ks.clear();
  for (std::size_t d = 0; d < inverse.cols(); ++d) {
    std::vector<double> col = inverse.column(d);
    ks.push_back(ks_statistic(col));
    if (col.size() > kMaxShapiroWilk) col.resize(kMaxShapiroWilk);
    sw.push_back(shapiro_wilk(col));
  }
}

MetricsReport evaluate(const TrainerState& state, const GaussianMixture& mix,
                       const EvalOptions& opts, Rng& rng) {
  if (opts.n_gen == 0) throw DomainError("evaluate: n_gen must be > 0");
  if (opts.n_real < 3) throw DomainError("evaluate: n_real must be >= 3");
  MetricsReport r;
  const Matrix x = generate(state.g, opts.n_gen, state.g.input_size(), rng);
  require_finite(x, "generated samples");
  const ModeAssignment a = assign_modes(x, mix, opts.radius_factor);
  r.modes_covered = modes_covered(a, opts.min_count);
  r.quality = quality(a);
  r.reverse_kl = reverse_kl(a, mix.centers.size());
  const Matrix z = inverse_samples(state, mix, opts.n_real, rng);
  require_finite(z, "inverse samples");
  iid_statistics(z, r.sw_per_dim, r.ks_per_dim);
  return r;
}

}  // namespace iidgan

#include "iidgan/synthdata.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "iidgan/error.hpp"
#include "iidgan/format.hpp"

namespace iidgan {

void validate(const GaussianMixture& mix) {
  if (!(mix.std > 0.0) || !std::isfinite(mix.std)) throw DomainError("mixture std must be > 0");
  if (mix.centers.empty()) throw DomainError("mixture has no centers");
  for (std::size_t i = 0; i < mix.centers.size(); ++i)
    for (std::size_t j = i + 1; j < mix.centers.size(); ++j)
      if (mix.centers[i] == mix.centers[j]) throw DomainError("mixture centers must be distinct");
}

GaussianMixture ring_mixture(double std) {
  GaussianMixture mix;
  mix.std = std;
  for (int i = 1; i <= 8; ++i) {
    const double angle = i * std::numbers::pi / 4.0;
    mix.centers.push_back({2.0 * std::cos(angle), 2.0 * std::sin(angle)});
  }
  validate(mix);
  return mix;
}

GaussianMixture grid_mixture(double std) {
  GaussianMixture mix;
  mix.std = std;
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j) mix.centers.push_back({2.0 * i, 2.0 * j});
  validate(mix);
  return mix;
}

Matrix sample_mixture(const GaussianMixture& mix, std::size_t n, Rng& rng,
                      std::vector<std::size_t>* modes_out) {
  if (n == 0) throw DomainError("sample_mixture: n must be > 0");
  Matrix out(n, 2);
  if (modes_out) modes_out->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = rng.below(mix.centers.size());
    const auto noise = rng.normal_pair();
    out(i, 0) = mix.centers[k][0] + mix.std * noise[0];
    out(i, 1) = mix.centers[k][1] + mix.std * noise[1];
    if (modes_out) (*modes_out)[i] = k;
  }
  return out;
}

Matrix sample_standard_normal(std::size_t n, std::size_t dim, Rng& rng) {
  if (n == 0 || dim == 0) throw DomainError("sample_standard_normal: n and dim must be > 0");
  Matrix out(n, dim);
  auto v = out.values();
  for (std::size_t i = 0; i < v.size(); i += 2) {
    const auto pair = rng.normal_pair();
    v[i] = pair[0];
    if (i + 1 < v.size()) v[i + 1] = pair[1];
  }
  return out;
}

void write_dataset_csv(const std::filesystem::path& path, const Matrix& samples,
                       const std::vector<std::size_t>& modes) {
  if (samples.cols() != 2 || modes.size() != samples.rows())
    throw ShapeError("write_dataset_csv: expected n×2 samples and n mode labels");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "x0,x1,mode\n";
  for (std::size_t i = 0; i < samples.rows(); ++i)
    out << format_double(samples(i, 0)) << ',' << format_double(samples(i, 1)) << ','
        << modes[i] << '\n';
}

}  // namespace iidgan

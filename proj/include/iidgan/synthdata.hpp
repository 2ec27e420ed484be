#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "iidgan/matrix.hpp"
#include "iidgan/rng.hpp"

namespace iidgan {

using Point2 = std::array<double, 2>;

/// Equal-weight mixture of isotropic 2-D Gaussians sharing one std.
struct GaussianMixture {
  std::vector<Point2> centers;
  double std = 1.0;

  std::size_t modes() const { return centers.size(); }
};

/// Checks std > 0, at least one center, and pairwise-distinct centers.
void validate(const GaussianMixture& mix);

/// 8 modes at (2cos(iπ/4), 2sin(iπ/4)), i = 1..8, std 0.001.
GaussianMixture ring_mixture(double std = 0.001);

/// 25 modes at (2i, 2j), i, j ∈ {−2..2}, std 0.0025.
GaussianMixture grid_mixture(double std = 0.0025);

/// n draws. Per sample: one mode draw, then one Box–Muller pair.
Matrix sample_mixture(const GaussianMixture& mix, std::size_t n, Rng& rng,
                      std::vector<std::size_t>* modes_out = nullptr);

/// n × dim IID N(0, 1) entries, filled row-major from Box–Muller pairs.
Matrix sample_standard_normal(std::size_t n, std::size_t dim, Rng& rng);

/// CSV with header `x0,x1,mode`.
void write_dataset_csv(const std::filesystem::path& path, const Matrix& samples,
                       const std::vector<std::size_t>& modes);

}  // namespace iidgan

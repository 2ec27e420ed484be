#pragma once

#include <cstdint>
#include <vector>

#include "iidgan/mlp.hpp"

namespace iidgan {

struct AdamParams {
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  bool operator==(const AdamParams&) const = default;
};

/// Moment accumulators for every parameter of one network, laid out layer
/// by layer as weight then bias.
struct AdamState {
  AdamParams params;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::uint64_t step = 0;

  AdamState() = default;
  AdamState(const Mlp& net, AdamParams p);

  bool operator==(const AdamState&) const = default;
};

/// One bias-corrected Adam update from the accumulated gradients, which are
/// then zeroed. Throws NonFiniteError if any gradient is NaN or infinite.
void adam_step(Mlp& net, AdamState& state);

}  // namespace iidgan

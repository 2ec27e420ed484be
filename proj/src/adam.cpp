#include "iidgan/adam.hpp"

#include <cmath>

#include "iidgan/error.hpp"
#include "iidgan/kernels.hpp"

namespace iidgan {
namespace {

bool finite(const double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(p[i])) return false;
  return true;
}

}  // namespace

AdamState::AdamState(const Mlp& net, AdamParams p) : params(p) {
  for (const auto& l : net.layers()) {
    first_moment.emplace_back(l.weight.size(), 0.0);
    first_moment.emplace_back(l.bias.size(), 0.0);
    second_moment.emplace_back(l.weight.size(), 0.0);
    second_moment.emplace_back(l.bias.size(), 0.0);
  }
}

void adam_step(Mlp& net, AdamState& state) {
  auto& layers = net.layers();
  if (state.first_moment.size() != 2 * layers.size())
    throw ShapeError("adam_step: optimizer state does not match network");
  for (const auto& l : layers) {
    if (!finite(l.weight_grad.data(), l.weight_grad.size()) ||
        !finite(l.bias_grad.data(), l.bias_grad.size()))
      throw NonFiniteError("adam_step: non-finite gradient");
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const auto& p = state.params;
  const kernels::AdamCoeffs c{
      p.beta1, p.beta2, p.learning_rate / (1.0 - std::pow(p.beta1, t)),
      1.0 / (1.0 - std::pow(p.beta2, t)), p.epsilon};
  const auto& kt = kernels::active();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    auto& l = layers[k];
    auto& mw = state.first_moment[2 * k];
    auto& vw = state.second_moment[2 * k];
    auto& mb = state.first_moment[2 * k + 1];
    auto& vb = state.second_moment[2 * k + 1];
    if (mw.size() != l.weight.size() || mb.size() != l.bias.size())
      throw ShapeError("adam_step: optimizer state does not match network");
    kt.adam_update(l.weight.size(), l.weight.data(), l.weight_grad.data(), mw.data(), vw.data(), c);
    kt.adam_update(l.bias.size(), l.bias.data(), l.bias_grad.data(), mb.data(), vb.data(), c);
  }
}

}  // namespace iidgan

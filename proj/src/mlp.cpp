#include "iidgan/mlp.hpp"

#include <cmath>

#include "iidgan/error.hpp"
#include "iidgan/kernels.hpp"

namespace iidgan {
namespace {

double apply(const Activation& act, double x) {
  switch (act.kind) {
    case ActivationKind::ReLU: return x > 0.0 ? x : 0.0;
    case ActivationKind::LeakyReLU: return x > 0.0 ? x : act.slope * x;
    case ActivationKind::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case ActivationKind::Tanh: return std::tanh(x);
    case ActivationKind::Identity: return x;
  }
  return x;
}

// d act / d pre, given both the pre-activation and the activation value.
double derivative(const Activation& act, double pre, double out) {
  switch (act.kind) {
    case ActivationKind::ReLU: return pre > 0.0 ? 1.0 : 0.0;
    case ActivationKind::LeakyReLU: return pre > 0.0 ? 1.0 : act.slope;
    case ActivationKind::Sigmoid: return out * (1.0 - out);
    case ActivationKind::Tanh: return 1.0 - out * out;
    case ActivationKind::Identity: return 1.0;
  }
  return 1.0;
}

// pre = input · Wᵀ + b
Matrix affine(const AffineLayer& layer, const Matrix& input) {
  const std::size_t batch = input.rows();
  Matrix pre(batch, layer.out_size());
  for (std::size_t r = 0; r < batch; ++r) {
    auto row = pre.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = layer.bias[j];
  }
  const Matrix wt = layer.weight.transposed();
  kernels::active().gemm_acc(batch, layer.out_size(), layer.in_size(), input.data(),
                             input.cols(), wt.data(), wt.cols(), pre.data(), pre.cols());
  return pre;
}

Matrix activate(const Activation& act, const Matrix& pre) {
  if (act.kind == ActivationKind::Identity) return pre;
  Matrix out = pre;
  for (double& v : out.values()) v = apply(act, v);
  return out;
}

}  // namespace

std::string activation_name(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::ReLU: return "relu";
    case ActivationKind::LeakyReLU: return "leaky_relu";
    case ActivationKind::Sigmoid: return "sigmoid";
    case ActivationKind::Tanh: return "tanh";
    case ActivationKind::Identity: return "identity";
  }
  return "identity";
}

ActivationKind parse_activation(std::string_view name) {
  if (name == "relu") return ActivationKind::ReLU;
  if (name == "leaky_relu") return ActivationKind::LeakyReLU;
  if (name == "sigmoid") return ActivationKind::Sigmoid;
  if (name == "tanh") return ActivationKind::Tanh;
  if (name == "identity") return ActivationKind::Identity;
  throw DomainError("unknown activation '" + std::string(name) + "'");
}

Mlp::Mlp(std::vector<AffineLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw DomainError("Mlp: no layers");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    auto& l = layers_[k];
    if (l.weight.rows() == 0 || l.weight.cols() == 0) throw DomainError("Mlp: zero-sized layer");
    if (l.bias.size() != l.out_size()) throw ShapeError("Mlp: bias length mismatch");
    if (k + 1 < layers_.size() && layers_[k + 1].in_size() != l.out_size())
      throw ShapeError("Mlp: consecutive layer sizes disagree");
    if (l.weight_grad.rows() != l.weight.rows() || l.weight_grad.cols() != l.weight.cols())
      l.weight_grad = Matrix(l.weight.rows(), l.weight.cols());
    if (l.bias_grad.size() != l.bias.size()) l.bias_grad.assign(l.bias.size(), 0.0);
  }
}

std::size_t Mlp::input_size() const { return layers_.empty() ? 0 : layers_.front().in_size(); }
std::size_t Mlp::output_size() const { return layers_.empty() ? 0 : layers_.back().out_size(); }

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<std::size_t> Mlp::layer_sizes() const {
  std::vector<std::size_t> sizes;
  if (layers_.empty()) return sizes;
  sizes.push_back(input_size());
  for (const auto& l : layers_) sizes.push_back(l.out_size());
  return sizes;
}

Matrix Mlp::predict(const Matrix& input) const {
  if (input.cols() != input_size()) throw ShapeError("Mlp::predict: input width mismatch");
  Matrix x = input;
  for (const auto& l : layers_) x = activate(l.activation, affine(l, x));
  require_finite(x, "Mlp::predict");
  return x;
}

Matrix Mlp::forward(const Matrix& input, Tape& tape) const {
  if (input.cols() != input_size()) throw ShapeError("Mlp::forward: input width mismatch");
  tape.inputs.clear();
  tape.pre.clear();
  tape.inputs.reserve(layers_.size());
  tape.pre.reserve(layers_.size());
  Matrix x = input;
  for (const auto& l : layers_) {
    Matrix pre = affine(l, x);
    Matrix out = activate(l.activation, pre);
    tape.inputs.push_back(std::move(x));
    tape.pre.push_back(std::move(pre));
    x = std::move(out);
  }
  require_finite(x, "Mlp::forward");
  tape.output = x;
  return x;
}

Matrix Mlp::forward(const Matrix& input) { return forward(input, tape_); }

Matrix Mlp::backward(const Tape& tape, const Matrix& output_grad, ParamGrads grads) {
  if (!tape.valid() || tape.inputs.size() != layers_.size())
    throw DomainError("Mlp::backward: no matching forward pass");
  if (output_grad.rows() != tape.batch() || output_grad.cols() != output_size())
    throw ShapeError("Mlp::backward: gradient shape mismatch");
  const auto& kt = kernels::active();
  Matrix delta = output_grad;
  for (std::size_t idx = layers_.size(); idx-- > 0;) {
    auto& l = layers_[idx];
    const Matrix& pre = tape.pre[idx];
    const Matrix& in = tape.inputs[idx];
    if (l.activation.kind != ActivationKind::Identity) {
      const Matrix& out = (idx + 1 < layers_.size()) ? tape.inputs[idx + 1] : tape.output;
      for (std::size_t i = 0; i < delta.size(); ++i)
        delta.data()[i] *= derivative(l.activation, pre.data()[i], out.data()[i]);
    }
    const std::size_t batch = delta.rows();
    if (grads == ParamGrads::Accumulate) {
      // dW += deltaᵀ · in ; db += colsum(delta)
      const Matrix dt = delta.transposed();
      kt.gemm_acc(l.out_size(), l.in_size(), batch, dt.data(), dt.cols(), in.data(), in.cols(),
                  l.weight_grad.data(), l.weight_grad.cols());
      kt.col_sum_acc(batch, l.out_size(), delta.data(), delta.cols(), l.bias_grad.data());
    }
    // d in = delta · W
    Matrix dx(batch, l.in_size());
    kt.gemm_acc(batch, l.in_size(), l.out_size(), delta.data(), delta.cols(), l.weight.data(),
                l.weight.cols(), dx.data(), dx.cols());
    delta = std::move(dx);
  }
  require_finite(delta, "Mlp::backward");
  return delta;
}

Matrix Mlp::backward(const Matrix& output_grad) {
  Matrix g = backward(tape_, output_grad, ParamGrads::Accumulate);
  tape_ = Tape{};
  return g;
}

void Mlp::zero_grad() {
  for (auto& l : layers_) {
    l.weight_grad.fill(0.0);
    std::fill(l.bias_grad.begin(), l.bias_grad.end(), 0.0);
  }
}

bool Mlp::operator==(const Mlp& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const auto& a = layers_[k];
    const auto& b = other.layers_[k];
    if (!(a.weight == b.weight) || a.bias != b.bias || !(a.activation == b.activation))
      return false;
  }
  return true;
}

Mlp mlp_new(const std::vector<std::size_t>& layer_sizes,
            const std::vector<Activation>& activations, Rng& rng) {
  if (layer_sizes.size() < 2) throw DomainError("mlp_new: need at least two layer sizes");
  if (activations.size() != layer_sizes.size() - 1)
    throw DomainError("mlp_new: need one activation per affine layer");
  for (std::size_t s : layer_sizes)
    if (s == 0) throw DomainError("mlp_new: zero-sized layer");

  std::vector<AffineLayer> layers;
  layers.reserve(activations.size());
  for (std::size_t k = 0; k + 1 < layer_sizes.size(); ++k) {
    const std::size_t in = layer_sizes[k];
    const std::size_t out = layer_sizes[k + 1];
    const auto kind = activations[k].kind;
    const bool relu_family = kind == ActivationKind::ReLU || kind == ActivationKind::LeakyReLU;
    const double stddev = std::sqrt((relu_family ? 2.0 : 1.0) / static_cast<double>(in));
    AffineLayer l;
    l.weight = Matrix(out, in);
    auto w = l.weight.values();
    for (std::size_t i = 0; i < w.size(); i += 2) {
      const auto pair = rng.normal_pair();
      w[i] = stddev * pair[0];
      if (i + 1 < w.size()) w[i + 1] = stddev * pair[1];
    }
    l.bias.assign(out, 0.0);
    l.activation = activations[k];
    layers.push_back(std::move(l));
  }
  return Mlp(std::move(layers));
}

Mlp four_layer_mlp(std::size_t in, std::size_t out, Activation output_activation, Rng& rng) {
  return mlp_new({in, 100, 200, 100, out},
                 {Activation::relu(), Activation::relu(), Activation::relu(), output_activation},
                 rng);
}

}  // namespace iidgan

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iidgan/matrix.hpp"
#include "iidgan/rng.hpp"

namespace iidgan {

enum class ActivationKind { ReLU, LeakyReLU, Sigmoid, Tanh, Identity };

struct Activation {
  ActivationKind kind = ActivationKind::Identity;
  double slope = 0.2;  // LeakyReLU only

  static Activation relu() { return {ActivationKind::ReLU, 0.0}; }
  static Activation leaky_relu(double slope = 0.2) { return {ActivationKind::LeakyReLU, slope}; }
  static Activation sigmoid() { return {ActivationKind::Sigmoid, 0.0}; }
  static Activation tanh() { return {ActivationKind::Tanh, 0.0}; }
  static Activation identity() { return {ActivationKind::Identity, 0.0}; }

  bool operator==(const Activation&) const = default;
};

/// Lower-case name used in checkpoints: "relu", "leaky_relu", "sigmoid",
/// "tanh", "identity".
std::string activation_name(ActivationKind kind);
ActivationKind parse_activation(std::string_view name);

/// y = act(W x + b), W is out × in.
struct AffineLayer {
  Matrix weight;
  std::vector<double> bias;
  Activation activation;
  Matrix weight_grad;
  std::vector<double> bias_grad;

  std::size_t in_size() const { return weight.cols(); }
  std::size_t out_size() const { return weight.rows(); }
};

/// Intermediate values of one forward pass.
struct Tape {
  std::vector<Matrix> inputs;       // input of layer k
  std::vector<Matrix> pre;          // pre-activation of layer k
  Matrix output;

  bool valid() const { return !inputs.empty(); }
  std::size_t batch() const { return inputs.empty() ? 0 : inputs.front().rows(); }
};

enum class ParamGrads { Accumulate, Skip };

class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<AffineLayer> layers);

  std::vector<AffineLayer>& layers() { return layers_; }
  const std::vector<AffineLayer>& layers() const { return layers_; }

  std::size_t input_size() const;
  std::size_t output_size() const;
  std::size_t parameter_count() const;

  /// Layer widths including the input, e.g. {2, 100, 200, 100, 2}.
  std::vector<std::size_t> layer_sizes() const;

  /// Forward pass without recording anything.
  Matrix predict(const Matrix& input) const;

  /// Forward pass recording into an external tape.
  Matrix forward(const Matrix& input, Tape& tape) const;

  /// Forward pass recording into the network's own tape.
  Matrix forward(const Matrix& input);

  /// Backpropagate dL/d(output) through `tape`. Parameter gradients are
  /// added to the gradient buffers unless `grads` is Skip. Returns
  /// dL/d(input).
  Matrix backward(const Tape& tape, const Matrix& output_grad,
                  ParamGrads grads = ParamGrads::Accumulate);

  /// Backward through the network's own tape. The tape is consumed.
  Matrix backward(const Matrix& output_grad);

  void zero_grad();

  bool operator==(const Mlp& other) const;

 private:
  std::vector<AffineLayer> layers_;
  Tape tape_;
};

/// He initialisation (variance 2/fan_in) for ReLU-family layers, Xavier
/// (variance 1/fan_in) otherwise. Biases and gradients start at zero.
Mlp mlp_new(const std::vector<std::size_t>& layer_sizes,
            const std::vector<Activation>& activations, Rng& rng);

/// Four affine layers with hidden widths 100-200-100 and ReLU between them.
Mlp four_layer_mlp(std::size_t in, std::size_t out, Activation output_activation, Rng& rng);

}  // namespace iidgan

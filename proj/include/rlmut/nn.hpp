#ifndef RLMUT_NN_HPP_
#define RLMUT_NN_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "json.hpp"

namespace rlmut::nn {

// Batches are column-major: one column per example.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Fully connected network, ReLU on hidden layers and a linear output layer.
class Network {
 public:
  Network() = default;

  // Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
  static Network init(const std::vector<int>& layer_sizes, std::uint64_t seed);
  static Network zeros(const std::vector<int>& layer_sizes);

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  std::size_t layer_count() const { return weights_.size(); }
  std::size_t input_size() const { return static_cast<std::size_t>(layer_sizes_.front()); }
  std::size_t output_size() const { return static_cast<std::size_t>(layer_sizes_.back()); }
  std::size_t parameter_count() const;

  std::vector<double> forward(std::span<const double> input) const;
  Matrix forward_batch(const Matrix& inputs) const;

  Matrix& weights(std::size_t layer) { return weights_[layer]; }
  const Matrix& weights(std::size_t layer) const { return weights_[layer]; }
  Vector& biases(std::size_t layer) { return biases_[layer]; }
  const Vector& biases(std::size_t layer) const { return biases_[layer]; }

  // Flattened parameters, layer by layer: weights (column-major) then biases.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  // this <- tau * source + (1 - tau) * this
  void polyak_update(const Network& source, double tau);

  std::uint64_t checksum() const;

  friend bool operator==(const Network& a, const Network& b);

 private:
  std::vector<int> layer_sizes_;
  std::vector<Matrix> weights_;  // out x in
  std::vector<Vector> biases_;
};

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

// Mean over the batch of (q[selected] - target)^2.
struct SelectedMseLoss {
  std::vector<int> selected;
  std::vector<double> targets;
};

// Outputs are [logits..., value]. Mean over the batch of
//   -log pi(a|s) * advantage + value_coef * (V(s) - return)^2 - entropy_coef * H(pi(.|s))
struct ActorCriticLoss {
  std::vector<int> actions;
  std::vector<double> advantages;
  std::vector<double> returns;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
};

// Single-logit binary cross-entropy, weighted per example, averaged over the batch.
struct LogisticLoss {
  std::vector<double> labels;
  std::vector<double> weights;
};

using Loss = std::variant<SelectedMseLoss, ActorCriticLoss, LogisticLoss>;

// Mean loss over the batch; fills `output_grad` with dLoss/dOutput when non-null.
double evaluate_loss(const Loss& loss, const Matrix& outputs, Matrix* output_grad);

// Mean loss and its gradient with respect to every parameter.
double compute_gradients(const Network& net, const Matrix& inputs, const Loss& loss,
                         Gradients& grads);

// Parameter gradients given dLoss/dOutput for each column of `inputs`.
void backward(const Network& net, const Matrix& inputs, const Matrix& output_grad,
              Gradients& grads);

// Throws NumericalError naming the first layer with a non-finite gradient.
void check_finite(const Gradients& grads);

enum class OptimizerKind { SGD, Adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Global L2 gradient-norm clip; 0 disables clipping.
  double max_grad_norm = 0.0;
};

class Optimizer {
 public:
  Optimizer(const OptimizerConfig& config, const Network& net);

  void apply(Network& net, Gradients& grads);

  const OptimizerConfig& config() const { return config_; }
  std::int64_t steps() const { return steps_; }

 private:
  OptimizerConfig config_;
  std::int64_t steps_ = 0;
  std::vector<Matrix> m_w_, v_w_;
  std::vector<Vector> m_b_, v_b_;
};

// One optimizer step. Returns the mean loss before the update. Throws
// NumericalError naming the layer when a gradient is not finite; parameters
// are left untouched in that case.
double backprop_step(Network& net, Optimizer& optimizer, const Matrix& inputs,
                     const Loss& loss);

// Max-shifted softmax.
std::vector<double> softmax(std::span<const double> logits);

void to_json(nlohmann::json& j, const Network& net);
void from_json(const nlohmann::json& j, Network& net);

}  // namespace rlmut::nn

#endif  // RLMUT_NN_HPP_

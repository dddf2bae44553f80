#include "rlmut/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rlmut/checksum.hpp"
#include "rlmut/error.hpp"
#include "rlmut/rng.hpp"

namespace rlmut::nn {

namespace {

void validate_sizes(const std::vector<int>& layer_sizes) {
  if (layer_sizes.size() < 2)
    throw ValidationError("a network needs at least an input and an output layer");
  for (int s : layer_sizes)
    if (s <= 0) throw ValidationError("layer sizes must be positive");
}

struct ForwardCache {
  std::vector<Matrix> activations;  // activations[0] is the input
  std::vector<Matrix> pre_activations;
};

Matrix forward_cached(const Network& net, const Matrix& inputs, ForwardCache* cache) {
  Matrix a = inputs;
  if (cache) {
    cache->activations.clear();
    cache->pre_activations.clear();
    cache->activations.push_back(a);
  }
  const std::size_t layers = net.layer_count();
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix z = net.weights(l) * a;
    z.colwise() += net.biases(l);
    if (cache) cache->pre_activations.push_back(z);
    if (l + 1 < layers) {
      a = z.cwiseMax(0.0);
      if (cache) cache->activations.push_back(a);
    } else {
      a = std::move(z);
    }
  }
  return a;
}

double log_sum_exp(const Eigen::Ref<const Vector>& z) {
  const double m = z.maxCoeff();
  return m + std::log((z.array() - m).exp().sum());
}

struct LossVisitor {
  const Matrix& outputs;
  Matrix* grad;

  std::size_t batch() const { return static_cast<std::size_t>(outputs.cols()); }

  void check_length(std::size_t n, const char* what) const {
    if (n != batch())
      throw ValidationError(std::string(what) + " length does not match batch size");
  }

  double operator()(const SelectedMseLoss& loss) const {
    check_length(loss.selected.size(), "selected");
    check_length(loss.targets.size(), "targets");
    const double n = static_cast<double>(batch());
    double total = 0.0;
    if (grad) grad->setZero(outputs.rows(), outputs.cols());
    for (Eigen::Index b = 0; b < outputs.cols(); ++b) {
      const int k = loss.selected[b];
      if (k < 0 || k >= outputs.rows())
        throw ValidationError("selected output index out of range");
      const double diff = outputs(k, b) - loss.targets[b];
      total += diff * diff;
      if (grad) (*grad)(k, b) = 2.0 * diff / n;
    }
    return total / n;
  }

  double operator()(const ActorCriticLoss& loss) const {
    check_length(loss.actions.size(), "actions");
    check_length(loss.advantages.size(), "advantages");
    check_length(loss.returns.size(), "returns");
    const Eigen::Index actions = outputs.rows() - 1;
    if (actions < 1) throw ValidationError("actor-critic output needs logits and a value");
    const double n = static_cast<double>(batch());
    double total = 0.0;
    if (grad) grad->setZero(outputs.rows(), outputs.cols());
    for (Eigen::Index b = 0; b < outputs.cols(); ++b) {
      const int a = loss.actions[b];
      if (a < 0 || a >= actions) throw ValidationError("action index out of range");
      const Vector logits = outputs.col(b).head(actions);
      const Vector log_p = logits.array() - log_sum_exp(logits);
      const Vector p = log_p.array().exp();
      const double entropy = -(p.array() * log_p.array()).sum();
      const double value = outputs(actions, b);
      const double value_err = value - loss.returns[b];
      total += -log_p(a) * loss.advantages[b] +
               loss.value_coef * value_err * value_err - loss.entropy_coef * entropy;
      if (grad) {
        for (Eigen::Index k = 0; k < actions; ++k) {
          const double indicator = k == a ? 1.0 : 0.0;
          const double g = -loss.advantages[b] * (indicator - p(k)) +
                           loss.entropy_coef * p(k) * (log_p(k) + entropy);
          (*grad)(k, b) = g / n;
        }
        (*grad)(actions, b) = 2.0 * loss.value_coef * value_err / n;
      }
    }
    return total / n;
  }

  double operator()(const LogisticLoss& loss) const {
    check_length(loss.labels.size(), "labels");
    if (!loss.weights.empty()) check_length(loss.weights.size(), "weights");
    if (outputs.rows() != 1) throw ValidationError("logistic loss needs a single output");
    const double n = static_cast<double>(batch());
    double total = 0.0;
    if (grad) grad->setZero(1, outputs.cols());
    for (Eigen::Index b = 0; b < outputs.cols(); ++b) {
      const double z = outputs(0, b);
      const double y = loss.labels[b];
      const double w = loss.weights.empty() ? 1.0 : loss.weights[b];
      const double softplus = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
      total += w * (softplus - y * z);
      if (grad) {
        const double sigma = 1.0 / (1.0 + std::exp(-z));
        (*grad)(0, b) = w * (sigma - y) / n;
      }
    }
    return total / n;
  }
};

}  // namespace

Network Network::zeros(const std::vector<int>& layer_sizes) {
  validate_sizes(layer_sizes);
  Network net;
  net.layer_sizes_ = layer_sizes;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    net.weights_.push_back(Matrix::Zero(layer_sizes[l + 1], layer_sizes[l]));
    net.biases_.push_back(Vector::Zero(layer_sizes[l + 1]));
  }
  return net;
}

Network Network::init(const std::vector<int>& layer_sizes, std::uint64_t seed) {
  Network net = zeros(layer_sizes);
  Stream stream(seed);
  for (auto& w : net.weights_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols()));
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = stream.uniform(-bound, bound);
  }
  return net;
}

std::size_t Network::parameter_count() const {
  std::size_t count = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l)
    count += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  return count;
}

std::vector<double> Network::forward(std::span<const double> input) const {
  if (input.size() != input_size()) {
    throw ValidationError("network input has length " + std::to_string(input.size()) +
                          ", expected " + std::to_string(input_size()));
  }
  const Matrix x = Eigen::Map<const Vector>(input.data(), static_cast<Eigen::Index>(input.size()));
  const Matrix out = forward_cached(*this, x, nullptr);
  return std::vector<double>(out.data(), out.data() + out.size());
}

Matrix Network::forward_batch(const Matrix& inputs) const {
  if (static_cast<std::size_t>(inputs.rows()) != input_size())
    throw ValidationError("batch input rows do not match the network input size");
  return forward_cached(*this, inputs, nullptr);
}

std::vector<double> Network::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    flat.insert(flat.end(), weights_[l].data(), weights_[l].data() + weights_[l].size());
    flat.insert(flat.end(), biases_[l].data(), biases_[l].data() + biases_[l].size());
  }
  return flat;
}

void Network::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count())
    throw ValidationError("parameter vector has the wrong length");
  std::size_t offset = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    std::copy_n(flat.begin() + offset, weights_[l].size(), weights_[l].data());
    offset += static_cast<std::size_t>(weights_[l].size());
    std::copy_n(flat.begin() + offset, biases_[l].size(), biases_[l].data());
    offset += static_cast<std::size_t>(biases_[l].size());
  }
}

void Network::polyak_update(const Network& source, double tau) {
  if (source.layer_sizes_ != layer_sizes_)
    throw ValidationError("polyak update between differently shaped networks");
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    weights_[l] = tau * source.weights_[l] + (1.0 - tau) * weights_[l];
    biases_[l] = tau * source.biases_[l] + (1.0 - tau) * biases_[l];
  }
}

std::uint64_t Network::checksum() const {
  Fnv1a h;
  for (int s : layer_sizes_) h.update_value(s);
  for (double p : parameters()) h.update_value(p);
  return h.digest();
}

bool operator==(const Network& a, const Network& b) {
  return a.layer_sizes_ == b.layer_sizes_ && a.parameters() == b.parameters();
}

double evaluate_loss(const Loss& loss, const Matrix& outputs, Matrix* output_grad) {
  if (outputs.cols() == 0) throw ValidationError("empty batch");
  return std::visit(LossVisitor{outputs, output_grad}, loss);
}

namespace {

void backward_cached(const Network& net, const ForwardCache& cache, Matrix delta,
                     Gradients& grads) {
  const std::size_t layers = net.layer_count();
  grads.weights.resize(layers);
  grads.biases.resize(layers);
  for (std::size_t l = layers; l-- > 0;) {
    grads.weights[l].noalias() = delta * cache.activations[l].transpose();
    grads.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      Matrix back = net.weights(l).transpose() * delta;
      delta = back.cwiseProduct(
          (cache.pre_activations[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
}

void check_batch(const Network& net, const Matrix& inputs) {
  if (inputs.cols() == 0) throw ValidationError("empty batch");
  if (static_cast<std::size_t>(inputs.rows()) != net.input_size())
    throw ValidationError("batch input rows do not match the network input size");
}

}  // namespace

double compute_gradients(const Network& net, const Matrix& inputs, const Loss& loss,
                         Gradients& grads) {
  check_batch(net, inputs);
  ForwardCache cache;
  const Matrix outputs = forward_cached(net, inputs, &cache);
  Matrix delta;
  const double value = evaluate_loss(loss, outputs, &delta);
  backward_cached(net, cache, std::move(delta), grads);
  return value;
}

void backward(const Network& net, const Matrix& inputs, const Matrix& output_grad,
              Gradients& grads) {
  check_batch(net, inputs);
  if (static_cast<std::size_t>(output_grad.rows()) != net.output_size() ||
      output_grad.cols() != inputs.cols())
    throw ValidationError("output gradient shape does not match the network output");
  ForwardCache cache;
  forward_cached(net, inputs, &cache);
  backward_cached(net, cache, output_grad, grads);
}

void check_finite(const Gradients& grads) {
  for (std::size_t l = 0; l < grads.weights.size(); ++l) {
    if (!grads.weights[l].allFinite() || !grads.biases[l].allFinite())
      throw NumericalError("non-finite gradient in layer " + std::to_string(l));
  }
}

Optimizer::Optimizer(const OptimizerConfig& config, const Network& net) : config_(config) {
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate))
    throw ValidationError("learning rate must be finite and non-negative");
  if (config.kind == OptimizerKind::Adam) {
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      m_w_.push_back(Matrix::Zero(net.weights(l).rows(), net.weights(l).cols()));
      v_w_.push_back(m_w_.back());
      m_b_.push_back(Vector::Zero(net.biases(l).size()));
      v_b_.push_back(m_b_.back());
    }
  }
}

void Optimizer::apply(Network& net, Gradients& grads) {
  if (grads.weights.size() != net.layer_count())
    throw ValidationError("gradient layer count does not match the network");
  if (config_.max_grad_norm > 0.0) {
    double sq = 0.0;
    for (std::size_t l = 0; l < grads.weights.size(); ++l)
      sq += grads.weights[l].squaredNorm() + grads.biases[l].squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > config_.max_grad_norm) {
      const double scale = config_.max_grad_norm / (norm + 1e-12);
      for (std::size_t l = 0; l < grads.weights.size(); ++l) {
        grads.weights[l] *= scale;
        grads.biases[l] *= scale;
      }
    }
  }
  ++steps_;
  const double lr = config_.learning_rate;
  if (config_.kind == OptimizerKind::SGD) {
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      net.weights(l) -= lr * grads.weights[l];
      net.biases(l) -= lr * grads.biases[l];
    }
    return;
  }
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  const double eps = config_.epsilon;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    m_w_[l] = b1 * m_w_[l] + (1.0 - b1) * grads.weights[l];
    v_w_[l] = b2 * v_w_[l] + (1.0 - b2) * grads.weights[l].cwiseAbs2();
    net.weights(l).array() -=
        lr * (m_w_[l].array() / c1) / ((v_w_[l].array() / c2).sqrt() + eps);
    m_b_[l] = b1 * m_b_[l] + (1.0 - b1) * grads.biases[l];
    v_b_[l] = b2 * v_b_[l] + (1.0 - b2) * grads.biases[l].cwiseAbs2();
    net.biases(l).array() -=
        lr * (m_b_[l].array() / c1) / ((v_b_[l].array() / c2).sqrt() + eps);
  }
}

double backprop_step(Network& net, Optimizer& optimizer, const Matrix& inputs,
                     const Loss& loss) {
  Gradients grads;
  const double value = compute_gradients(net, inputs, loss, grads);
  if (!std::isfinite(value)) throw NumericalError("non-finite loss");
  check_finite(grads);
  optimizer.apply(net, grads);
  return value;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

void to_json(nlohmann::json& j, const Network& net) {
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const Matrix& w = net.weights(l);
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < w.cols(); ++c) row.push_back(w(r, c));
      rows.push_back(std::move(row));
    }
    weights.push_back(std::move(rows));
    const Vector& b = net.biases(l);
    biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
  }
  j = nlohmann::json{{"layer_sizes", net.layer_sizes()},
                     {"weights", std::move(weights)},
                     {"biases", std::move(biases)},
                     {"activation", "relu_hidden_linear_output"}};
}

void from_json(const nlohmann::json& j, Network& net) {
  const auto sizes = j.at("layer_sizes").get<std::vector<int>>();
  if (j.at("activation").get<std::string>() != "relu_hidden_linear_output")
    throw ValidationError("unsupported activation scheme in checkpoint");
  net = Network::zeros(sizes);
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  if (weights.size() != net.layer_count() || biases.size() != net.layer_count())
    throw ValidationError("checkpoint layer count does not match layer_sizes");
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    Matrix& w = net.weights(l);
    const auto& rows = weights[l];
    if (rows.size() != static_cast<std::size_t>(w.rows()))
      throw ValidationError("checkpoint weight rows mismatch in layer " + std::to_string(l));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      const auto& row = rows[static_cast<std::size_t>(r)];
      if (row.size() != static_cast<std::size_t>(w.cols()))
        throw ValidationError("checkpoint weight columns mismatch in layer " + std::to_string(l));
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        w(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    const auto b = biases[l].get<std::vector<double>>();
    if (b.size() != static_cast<std::size_t>(net.biases(l).size()))
      throw ValidationError("checkpoint bias length mismatch in layer " + std::to_string(l));
    net.biases(l) = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size()));
  }
}

}  // namespace rlmut::nn

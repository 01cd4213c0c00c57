#include "fairsvdd/dense_net.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "fairsvdd/errors.hpp"

namespace fairsvdd {

const char* activation_name(Activation act) {
  return act == Activation::relu ? "relu" : "identity";
}

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "identity") return Activation::identity;
  throw DataError("unknown activation '" + name + "'");
}

std::size_t DenseNet::parameter_count() const {
  std::size_t count = 0;
  for (const auto& layer : layers)
    count += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  return count;
}

void DenseNet::validate() const {
  if (layers.empty()) throw DataError("net has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (!layer.weight.allFinite() || !layer.bias.allFinite())
      throw DataError("layer " + std::to_string(l) + " has non-finite parameters");
    if (l > 0 && layer.weight.cols() != layers[l - 1].weight.rows())
      throw DataError("layer " + std::to_string(l) + " fan_in does not chain");
    if (use_bias) {
      if (layer.bias.size() != layer.weight.rows())
        throw DataError("layer " + std::to_string(l) + " bias size mismatch");
    } else if (layer.bias.size() != 0) {
      throw DataError("bias present in a use_bias=false net");
    }
    if (layer.batch_norm) {
      if (layer.running_mean.size() != layer.weight.rows() ||
          layer.running_var.size() != layer.weight.rows())
        throw DataError("layer " + std::to_string(l) + " batch-norm stats size mismatch");
      if (!layer.running_mean.allFinite() || !layer.running_var.allFinite())
        throw DataError("layer " + std::to_string(l) + " has non-finite batch-norm stats");
    }
  }
}

DenseNet make_dense_net(Eigen::Index input_dim, const std::vector<int>& widths, bool use_bias,
                        Activation hidden_act, Activation final_act, std::uint64_t seed,
                        bool batch_norm) {
  if (widths.empty()) throw ConfigError("net needs at least one layer width");
  for (int w : widths)
    if (w < 1) throw ConfigError("layer widths must be >= 1");

  DenseNet net;
  net.use_bias = use_bias;
  Rng rng(seed);
  Eigen::Index fan_in = input_dim;
  for (std::size_t l = 0; l < widths.size(); ++l) {
    DenseLayer layer;
    layer.act = l + 1 == widths.size() ? final_act : hidden_act;
    layer.weight.resize(widths[l], fan_in);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
        layer.weight(r, c) = rng.uniform(-bound, bound);
    if (use_bias) {
      layer.bias.resize(widths[l]);
      for (Eigen::Index r = 0; r < layer.bias.size(); ++r)
        layer.bias[r] = rng.uniform(-bound, bound);
    }
    if (batch_norm) {
      layer.batch_norm = true;
      layer.running_mean = Eigen::VectorXd::Zero(widths[l]);
      layer.running_var = Eigen::VectorXd::Ones(widths[l]);
    }
    fan_in = widths[l];
    net.layers.push_back(std::move(layer));
  }
  return net;
}

namespace {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;

Eigen::MatrixXd apply_activation(Activation act, const Eigen::MatrixXd& pre) {
  if (act == Activation::relu) return pre.cwiseMax(0.0);
  return pre;
}

// `mutable_net` non-null means training mode: batch statistics are used and
// the running statistics are folded toward them.
Eigen::MatrixXd run_forward(const DenseNet& net, DenseNet* mutable_net,
                            const Eigen::MatrixXd& batch, ForwardTape* tape, BnMode mode) {
  if (net.layers.empty()) throw DataError("forward on an empty net");
  if (batch.cols() != net.input_dim())
    throw DataError("forward: batch has " + std::to_string(batch.cols()) +
                    " columns, net expects " + std::to_string(net.input_dim()));
  if (tape) {
    tape->input = batch;
    tape->act_input.clear();
    tape->post_act.clear();
    tape->bn_scale.clear();
    tape->batch_stats = mode == BnMode::batch;
  }

  const auto rows = static_cast<double>(batch.rows());
  Eigen::MatrixXd activation = batch;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    Eigen::MatrixXd pre = activation * layer.weight.transpose();
    if (layer.bias.size() > 0) pre.rowwise() += layer.bias.transpose();

    Eigen::VectorXd scale;
    if (layer.batch_norm) {
      Eigen::VectorXd mean, var;
      if (mode == BnMode::batch) {
        mean = pre.colwise().mean();
        var = (pre.rowwise() - mean.transpose()).array().square().colwise().sum() / rows;
        if (mutable_net) {
          auto& stats = mutable_net->layers[l];
          const double unbias = batch.rows() > 1 ? rows / (rows - 1.0) : 1.0;
          stats.running_mean =
              (1.0 - kBnMomentum) * stats.running_mean + kBnMomentum * mean;
          stats.running_var =
              (1.0 - kBnMomentum) * stats.running_var + kBnMomentum * (unbias * var);
        }
      } else {
        mean = layer.running_mean;
        var = layer.running_var;
      }
      scale = (var.array() + kBnEps).sqrt().inverse();
      pre = (pre.rowwise() - mean.transpose()).array().rowwise() * scale.transpose().array();
    }

    activation = apply_activation(layer.act, pre);
    if (tape) {
      tape->act_input.push_back(std::move(pre));
      tape->post_act.push_back(activation);
      tape->bn_scale.push_back(std::move(scale));
    }
  }
  return activation;
}

}  // namespace

Eigen::MatrixXd forward(const DenseNet& net, const Eigen::MatrixXd& batch, ForwardTape* tape,
                        BnMode mode) {
  return run_forward(net, nullptr, batch, tape, mode);
}

Eigen::MatrixXd forward_train(DenseNet& net, const Eigen::MatrixXd& batch, ForwardTape* tape) {
  return run_forward(net, &net, batch, tape, BnMode::batch);
}

Gradients Gradients::zeros_like(const DenseNet& net) {
  Gradients grads;
  for (const auto& layer : net.layers) {
    grads.weight.push_back(Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()));
    grads.bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
  }
  return grads;
}

void Gradients::add_scaled(const Gradients& other, double factor) {
  for (std::size_t l = 0; l < weight.size(); ++l) {
    weight[l] += factor * other.weight[l];
    if (bias[l].size() > 0) bias[l] += factor * other.bias[l];
  }
}

BackwardResult backward(const DenseNet& net, const ForwardTape& tape,
                        const Eigen::MatrixXd& output_grad) {
  const std::size_t n_layers = net.layers.size();
  if (tape.act_input.size() != n_layers || tape.post_act.size() != n_layers)
    throw DataError("backward: tape does not match net layer count");
  if (tape.input.cols() != net.input_dim() ||
      output_grad.rows() != tape.input.rows() ||
      output_grad.cols() != net.output_dim())
    throw DataError("backward: tape/output_grad shape mismatch");
  for (std::size_t l = 0; l < n_layers; ++l)
    if (tape.act_input[l].cols() != net.layers[l].weight.rows())
      throw DataError("backward: tape layer " + std::to_string(l) + " width mismatch");

  BackwardResult result;
  result.grads.weight.resize(n_layers);
  result.grads.bias.resize(n_layers);

  // delta starts as d(sum <output, output_grad>)/d(activation output) and is
  // pulled back through activation, batch norm, then the affine map.
  Eigen::MatrixXd delta = output_grad;
  for (std::size_t l = n_layers; l-- > 0;) {
    const auto& layer = net.layers[l];
    if (layer.act == Activation::relu)
      delta = delta.cwiseProduct(
          (tape.act_input[l].array() > 0.0).cast<double>().matrix());

    if (layer.batch_norm) {
      const Eigen::VectorXd& scale = tape.bn_scale[l];
      if (scale.size() != layer.weight.rows())
        throw DataError("backward: tape layer " + std::to_string(l) + " missing bn scale");
      if (tape.batch_stats) {
        // normalized values coupled through this batch's mean and variance
        const Eigen::MatrixXd& normalized = tape.act_input[l];
        const Eigen::RowVectorXd grad_mean = delta.colwise().mean();
        const Eigen::RowVectorXd grad_dot_mean =
            delta.cwiseProduct(normalized).colwise().mean();
        delta = ((delta.rowwise() - grad_mean).array() -
                 normalized.array().rowwise() * grad_dot_mean.array())
                    .rowwise() *
                scale.transpose().array();
      } else {
        delta = delta.array().rowwise() * scale.transpose().array();
      }
    }

    const Eigen::MatrixXd& layer_input = l == 0 ? tape.input : tape.post_act[l - 1];
    result.grads.weight[l] = delta.transpose() * layer_input;
    result.grads.bias[l] = layer.bias.size() > 0
                               ? Eigen::VectorXd(delta.colwise().sum().transpose())
                               : Eigen::VectorXd();
    delta = delta * layer.weight;
  }
  result.input_grad = std::move(delta);
  return result;
}

double weight_decay_term(const DenseNet& net, double alpha) {
  if (alpha < 0.0) throw ConfigError("weight decay alpha must be >= 0");
  double sum = 0.0;
  for (const auto& layer : net.layers) sum += layer.weight.squaredNorm();
  return 0.5 * alpha * sum;
}

void add_weight_decay_gradient(const DenseNet& net, double alpha, Gradients& grads) {
  for (std::size_t l = 0; l < net.layers.size(); ++l)
    grads.weight[l] += alpha * net.layers[l].weight;
}

AdamState AdamState::init(const DenseNet& net, double learning_rate) {
  AdamState state;
  state.learning_rate = learning_rate;
  for (const auto& layer : net.layers) {
    state.m_weight.push_back(Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()));
    state.v_weight.push_back(Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()));
    state.m_bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
    state.v_bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
  }
  return state;
}

namespace {

template <typename Param, typename Grad>
void adam_update(Param& param, const Grad& grad, Param& m, Param& v, double lr, double beta1,
                 double beta2, double eps, double bias1, double bias2) {
  m = beta1 * m + (1.0 - beta1) * grad;
  v = (beta2 * v.array() + (1.0 - beta2) * grad.array().square()).matrix();
  param.array() -=
      lr * (m.array() / bias1) / ((v.array() / bias2).sqrt() + eps);
}

}  // namespace

void adam_step(DenseNet& net, const Gradients& grads, AdamState& state) {
  if (grads.weight.size() != net.layers.size() || state.m_weight.size() != net.layers.size())
    throw DataError("adam_step: shape mismatch");
  state.step += 1;
  const double bias1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& layer = net.layers[l];
    if (grads.weight[l].rows() != layer.weight.rows() ||
        grads.weight[l].cols() != layer.weight.cols())
      throw DataError("adam_step: weight gradient shape mismatch at layer " + std::to_string(l));
    adam_update(layer.weight, grads.weight[l], state.m_weight[l], state.v_weight[l],
                state.learning_rate, state.beta1, state.beta2, state.epsilon, bias1, bias2);
    if (layer.bias.size() > 0) {
      if (grads.bias[l].size() != layer.bias.size())
        throw DataError("adam_step: bias gradient shape mismatch at layer " + std::to_string(l));
      adam_update(layer.bias, grads.bias[l], state.m_bias[l], state.v_bias[l],
                  state.learning_rate, state.beta1, state.beta2, state.epsilon, bias1, bias2);
    }
  }
}

Gradients finite_difference_gradients(DenseNet& net, const std::function<double()>& loss,
                                      double step_size) {
  Gradients grads = Gradients::zeros_like(net);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& layer = net.layers[l];
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
      const double saved = layer.weight.data()[i];
      layer.weight.data()[i] = saved + step_size;
      const double up = loss();
      layer.weight.data()[i] = saved - step_size;
      const double down = loss();
      layer.weight.data()[i] = saved;
      grads.weight[l].data()[i] = (up - down) / (2.0 * step_size);
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      const double saved = layer.bias[i];
      layer.bias[i] = saved + step_size;
      const double up = loss();
      layer.bias[i] = saved - step_size;
      const double down = loss();
      layer.bias[i] = saved;
      grads.bias[l][i] = (up - down) / (2.0 * step_size);
    }
  }
  return grads;
}

double max_relative_error(const Gradients& a, const Gradients& b, double floor) {
  double worst = 0.0;
  auto update = [&](double x, double y) {
    const double denom = std::max({std::abs(x), std::abs(y), floor});
    worst = std::max(worst, std::abs(x - y) / denom);
  };
  for (std::size_t l = 0; l < a.weight.size(); ++l) {
    for (Eigen::Index i = 0; i < a.weight[l].size(); ++i)
      update(a.weight[l].data()[i], b.weight[l].data()[i]);
    for (Eigen::Index i = 0; i < a.bias[l].size(); ++i) update(a.bias[l][i], b.bias[l][i]);
  }
  return worst;
}

std::uint64_t parameter_hash(const DenseNet& net) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto mix = [&](const double* data, Eigen::Index count) {
    for (Eigen::Index i = 0; i < count; ++i) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, &data[i], sizeof(bits));
      for (int b = 0; b < 8; ++b) {
        hash ^= (bits >> (8 * b)) & 0xffU;
        hash *= 0x100000001b3ULL;
      }
    }
  };
  for (const auto& layer : net.layers) {
    mix(layer.weight.data(), layer.weight.size());
    mix(layer.bias.data(), layer.bias.size());
  }
  return hash;
}

}  // namespace fairsvdd

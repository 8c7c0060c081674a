#include "shillsim/nn.hpp"

#include <cmath>

#include "shillsim/errors.hpp"

namespace shillsim {

Eigen::MatrixXd act_value(Activation act, const Eigen::MatrixXd& z) {
  switch (act) {
    case Activation::kLeakyRelu:
      return z.unaryExpr(
          [](double v) { return v > 0.0 ? v : kLeakySlope * v; });
    case Activation::kSigmoid:
      return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    case Activation::kIdentity:
      return z;
  }
  throw NumericError("unknown activation");
}

Eigen::MatrixXd act_deriv(Activation act, const Eigen::MatrixXd& z,
                          const Eigen::MatrixXd& a) {
  switch (act) {
    case Activation::kLeakyRelu:
      return z.unaryExpr(
          [](double v) { return v > 0.0 ? 1.0 : kLeakySlope; });
    case Activation::kSigmoid:
      return (a.array() * (1.0 - a.array())).matrix();
    case Activation::kIdentity:
      return Eigen::MatrixXd::Ones(z.rows(), z.cols());
  }
  throw NumericError("unknown activation");
}

Eigen::MatrixXd act_second(Activation act, const Eigen::MatrixXd& z,
                           const Eigen::MatrixXd& a) {
  switch (act) {
    case Activation::kLeakyRelu:
    case Activation::kIdentity:
      return Eigen::MatrixXd::Zero(z.rows(), z.cols());
    case Activation::kSigmoid:
      return (a.array() * (1.0 - a.array()) * (1.0 - 2.0 * a.array()))
          .matrix();
  }
  throw NumericError("unknown activation");
}

Mlp Mlp::xavier(const std::vector<int>& widths,
                const std::vector<Activation>& activations, Rng& rng) {
  if (widths.size() < 2 || activations.size() != widths.size() - 1) {
    throw UsageError("inconsistent layer specification");
  }
  Mlp net;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    AffineLayer layer;
    int fan_in = widths[l], fan_out = widths[l + 1];
    double bound = std::sqrt(6.0 / (fan_in + fan_out));
    layer.W.resize(fan_in, fan_out);
    for (int i = 0; i < fan_in; ++i) {
      for (int j = 0; j < fan_out; ++j) {
        layer.W(i, j) = rng.uniform(-bound, bound);
      }
    }
    layer.b = Eigen::RowVectorXd::Zero(fan_out);
    layer.act = activations[l];
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& x,
                            MlpTrace* trace) {
  if (trace) {
    trace->input = x;
    trace->z.clear();
    trace->a.clear();
  }
  Eigen::MatrixXd cur = x;
  for (const auto& layer : net.layers) {
    Eigen::MatrixXd z = (cur * layer.W).rowwise() + layer.b;
    cur = act_value(layer.act, z);
    if (trace) {
      trace->z.push_back(std::move(z));
      trace->a.push_back(cur);
    }
  }
  return cur;
}

MlpGrads MlpGrads::zeros_like(const Mlp& net) {
  MlpGrads g;
  for (const auto& layer : net.layers) {
    g.W.push_back(Eigen::MatrixXd::Zero(layer.W.rows(), layer.W.cols()));
    g.b.push_back(Eigen::RowVectorXd::Zero(layer.b.cols()));
  }
  return g;
}

void MlpGrads::add_scaled(const MlpGrads& other, double scale) {
  for (std::size_t l = 0; l < W.size(); ++l) {
    W[l] += scale * other.W[l];
    b[l] += scale * other.b[l];
  }
}

Eigen::MatrixXd mlp_backward(const Mlp& net, const MlpTrace& trace,
                             const Eigen::MatrixXd& dout, MlpGrads* grads) {
  Eigen::MatrixXd da = dout;
  for (int l = static_cast<int>(net.layers.size()) - 1; l >= 0; --l) {
    const auto& layer = net.layers[l];
    Eigen::MatrixXd delta =
        da.cwiseProduct(act_deriv(layer.act, trace.z[l], trace.a[l]));
    const Eigen::MatrixXd& below = l == 0 ? trace.input : trace.a[l - 1];
    if (grads) {
      grads->W[l] += below.transpose() * delta;
      grads->b[l] += delta.colwise().sum();
    }
    da = delta * layer.W.transpose();
  }
  return da;
}

std::vector<double> flatten(const Mlp& net) {
  std::vector<double> out;
  for (const auto& layer : net.layers) {
    for (int i = 0; i < layer.W.rows(); ++i) {
      for (int j = 0; j < layer.W.cols(); ++j) out.push_back(layer.W(i, j));
    }
    for (int j = 0; j < layer.b.cols(); ++j) out.push_back(layer.b(j));
  }
  return out;
}

void unflatten(Mlp& net, const std::vector<double>& values) {
  std::size_t pos = 0;
  for (auto& layer : net.layers) {
    for (int i = 0; i < layer.W.rows(); ++i) {
      for (int j = 0; j < layer.W.cols(); ++j) {
        if (pos >= values.size()) {
          throw UsageError("parameter vector too short");
        }
        layer.W(i, j) = values[pos++];
      }
    }
    for (int j = 0; j < layer.b.cols(); ++j) {
      if (pos >= values.size()) throw UsageError("parameter vector too short");
      layer.b(j) = values[pos++];
    }
  }
  if (pos != values.size()) {
    throw UsageError("parameter vector too long");
  }
}

AdamState AdamState::zeros_like(const Mlp& net) {
  AdamState s;
  for (const auto& layer : net.layers) {
    s.mW.push_back(Eigen::MatrixXd::Zero(layer.W.rows(), layer.W.cols()));
    s.vW.push_back(Eigen::MatrixXd::Zero(layer.W.rows(), layer.W.cols()));
    s.mb.push_back(Eigen::RowVectorXd::Zero(layer.b.cols()));
    s.vb.push_back(Eigen::RowVectorXd::Zero(layer.b.cols()));
  }
  return s;
}

void adam_step(Mlp& net, const MlpGrads& grads, AdamState& state,
               const AdamConfig& config) {
  state.step += 1;
  double bc1 = 1.0 - std::pow(config.beta1, double(state.step));
  double bc2 = 1.0 - std::pow(config.beta2, double(state.step));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
      m = config.beta1 * m + (1.0 - config.beta1) * g;
      v = config.beta2 * v.array() + (1.0 - config.beta2) * g.array().square();
      auto m_hat = m.array() / bc1;
      auto v_hat = v.array() / bc2;
      param.array() -=
          config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
    };
    update(net.layers[l].W, state.mW[l], state.vW[l], grads.W[l]);
    update(net.layers[l].b, state.mb[l], state.vb[l], grads.b[l]);
  }
}

}  // namespace shillsim

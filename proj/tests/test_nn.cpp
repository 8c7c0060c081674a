#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "shillsim/errors.hpp"
#include "shillsim/nn.hpp"
#include "shillsim/rng.hpp"

using namespace shillsim;

namespace {

constexpr Activation kL = Activation::kLeakyRelu;
constexpr Activation kS = Activation::kSigmoid;
constexpr Activation kI = Activation::kIdentity;

double scalar_act(Activation act, double z) {
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = z;
  return act_value(act, m)(0, 0);
}

// Forward pass redone with plain loops.
std::vector<double> forward_oracle(const Mlp& net,
                                   const std::vector<double>& input) {
  std::vector<double> acts = input;
  for (const auto& layer : net.layers) {
    std::vector<double> next(layer.W.cols());
    for (int j = 0; j < layer.W.cols(); ++j) {
      double z = layer.b(j);
      for (int i = 0; i < layer.W.rows(); ++i) z += acts[i] * layer.W(i, j);
      if (layer.act == kS) {
        next[j] = 1.0 / (1.0 + std::exp(-z));
      } else if (layer.act == kL) {
        next[j] = z > 0.0 ? z : kLeakySlope * z;
      } else {
        next[j] = z;
      }
    }
    acts = std::move(next);
  }
  return acts;
}

}  // namespace

TEST_CASE("activation derivatives match finite differences") {
  const double h = 1e-6;
  for (Activation act : {kL, kS, kI}) {
    for (double z : {-2.3, -0.7, 0.4, 1.9}) {
      Eigen::MatrixXd m(1, 1), up(1, 1), down(1, 1);
      m(0, 0) = z;
      Eigen::MatrixXd a = act_value(act, m);
      double d1 = act_deriv(act, m, a)(0, 0);
      double fd1 = (scalar_act(act, z + h) - scalar_act(act, z - h)) / (2 * h);
      CHECK(d1 == doctest::Approx(fd1).epsilon(1e-6));
      double d2 = act_second(act, m, a)(0, 0);
      double fd2 = (scalar_act(act, z + h) - 2 * scalar_act(act, z) +
                    scalar_act(act, z - h)) /
                   (h * h);
      CHECK(d2 == doctest::Approx(fd2).epsilon(1e-3).scale(1.0));
    }
  }
}

TEST_CASE("leaky slope and logistic values are exact") {
  Eigen::MatrixXd z(1, 3);
  z << -2.0, 0.0, 3.0;
  auto a = act_value(kL, z);
  CHECK(a(0, 0) == -0.4);
  CHECK(a(0, 1) == 0.0);
  CHECK(a(0, 2) == 3.0);
  auto s = act_value(kS, Eigen::MatrixXd::Zero(1, 1));
  CHECK(s(0, 0) == 0.5);
}

TEST_CASE("xavier layers respect the fan bound and zero the biases") {
  Rng rng(5);
  auto net = Mlp::xavier({7, 11, 2}, {kL, kS}, rng);
  REQUIRE(net.layers.size() == 2);
  CHECK(net.input_dim() == 7);
  CHECK(net.output_dim() == 2);
  double bound0 = std::sqrt(6.0 / (7 + 11));
  double bound1 = std::sqrt(6.0 / (11 + 2));
  CHECK(net.layers[0].W.cwiseAbs().maxCoeff() <= bound0);
  CHECK(net.layers[1].W.cwiseAbs().maxCoeff() <= bound1);
  CHECK(net.layers[0].b.cwiseAbs().maxCoeff() == 0.0);
  CHECK(net.layers[1].b.cwiseAbs().maxCoeff() == 0.0);
  // Bounds are not trivially slack.
  CHECK(net.layers[0].W.cwiseAbs().maxCoeff() > 0.5 * bound0);

  Rng rng2(5);
  auto again = Mlp::xavier({7, 11, 2}, {kL, kS}, rng2);
  CHECK(flatten(net) == flatten(again));

  CHECK_THROWS_AS(Mlp::xavier({3}, {}, rng), UsageError);
  CHECK_THROWS_AS(Mlp::xavier({3, 4}, {kL, kL}, rng), UsageError);
}

TEST_CASE("forward pass matches a scalar loop oracle") {
  Rng rng(6);
  auto net = Mlp::xavier({3, 5, 4, 2}, {kL, kS, kL}, rng);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd x(2, 3);
    for (int i = 0; i < x.size(); ++i) x(i / 3, i % 3) = rng.normal();
    auto y = mlp_forward(net, x);
    for (int r = 0; r < 2; ++r) {
      auto expect = forward_oracle(net, {x(r, 0), x(r, 1), x(r, 2)});
      for (int c = 0; c < 2; ++c) {
        CHECK(y(r, c) == doctest::Approx(expect[c]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("trace records every layer") {
  Rng rng(7);
  auto net = Mlp::xavier({2, 3, 1}, {kL, kI}, rng);
  MlpTrace trace;
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 2);
  auto y = mlp_forward(net, x, &trace);
  REQUIRE(trace.z.size() == 2);
  REQUIRE(trace.a.size() == 2);
  CHECK((trace.input - x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((trace.a[1] - y).cwiseAbs().maxCoeff() == 0.0);
  CHECK((trace.z[1] - y).cwiseAbs().maxCoeff() == 0.0);  // identity head
}

TEST_CASE("backward gradients match central differences") {
  Rng rng(8);
  auto net = Mlp::xavier({3, 6, 4, 2}, {kL, kS, kL}, rng);
  Eigen::MatrixXd x(3, 3);
  Eigen::MatrixXd weights(3, 2);
  for (int i = 0; i < x.size(); ++i) x(i % 3, i / 3) = rng.normal();
  for (int i = 0; i < weights.size(); ++i) {
    weights(i % 3, i / 3) = rng.uniform(-1.0, 1.0);
  }
  auto loss = [&] {
    return (mlp_forward(net, x).cwiseProduct(weights)).sum();
  };

  auto params = flatten(net);
  MlpTrace trace;
  mlp_forward(net, x, &trace);
  auto grads = MlpGrads::zeros_like(net);
  Eigen::MatrixXd dinput = mlp_backward(net, trace, weights, &grads);

  std::vector<double> analytic;
  for (std::size_t l = 0; l < grads.W.size(); ++l) {
    for (int i = 0; i < grads.W[l].rows(); ++i) {
      for (int j = 0; j < grads.W[l].cols(); ++j) {
        analytic.push_back(grads.W[l](i, j));
      }
    }
    for (int j = 0; j < grads.b[l].cols(); ++j) analytic.push_back(grads.b[l](j));
  }
  const double h = 1e-5;
  for (std::size_t p = 0; p < params.size(); ++p) {
    double orig = params[p];
    params[p] = orig + h;
    unflatten(net, params);
    double up = loss();
    params[p] = orig - h;
    unflatten(net, params);
    double down = loss();
    params[p] = orig;
    unflatten(net, params);
    double fd = (up - down) / (2 * h);
    CHECK(analytic[p] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
  }

  for (int r = 0; r < x.rows(); ++r) {
    for (int c = 0; c < x.cols(); ++c) {
      double orig = x(r, c);
      x(r, c) = orig + h;
      double up = loss();
      x(r, c) = orig - h;
      double down = loss();
      x(r, c) = orig;
      CHECK(dinput(r, c) ==
            doctest::Approx((up - down) / (2 * h)).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("flatten and unflatten round trip and validate length") {
  Rng rng(9);
  auto net = Mlp::xavier({2, 4, 3}, {kL, kL}, rng);
  auto params = flatten(net);
  CHECK(params.size() == 2 * 4 + 4 + 4 * 3 + 3);
  auto copy = net;
  std::vector<double> shifted(params);
  for (auto& v : shifted) v += 1.0;
  unflatten(copy, shifted);
  CHECK(flatten(copy) != params);
  unflatten(copy, params);
  CHECK(flatten(copy) == params);

  shifted.pop_back();
  CHECK_THROWS_AS(unflatten(copy, shifted), UsageError);
  shifted.push_back(0.0);
  shifted.push_back(0.0);
  CHECK_THROWS_AS(unflatten(copy, shifted), UsageError);
}

TEST_CASE("adam steps follow the hand computed trajectory") {
  Mlp net;
  AffineLayer layer;
  layer.W = Eigen::MatrixXd::Zero(1, 1);
  layer.b = Eigen::RowVectorXd::Zero(1);
  layer.act = kI;
  net.layers.push_back(layer);

  AdamConfig cfg;  // lr 1e-3, beta1 0, beta2 0.9
  auto state = AdamState::zeros_like(net);
  MlpGrads g = MlpGrads::zeros_like(net);

  g.W[0](0, 0) = 2.0;
  adam_step(net, g, state, cfg);
  // v = 0.1 * 4, v_hat = v / (1 - 0.9) = 4, step = lr * 2 / (2 + eps).
  double expect1 = -cfg.learning_rate * 2.0 / (2.0 + cfg.epsilon);
  CHECK(net.layers[0].W(0, 0) == doctest::Approx(expect1).epsilon(1e-12));

  g.W[0](0, 0) = -1.0;
  adam_step(net, g, state, cfg);
  double v2 = 0.9 * 0.4 + 0.1 * 1.0;
  double vhat2 = v2 / (1.0 - 0.81);
  double expect2 =
      expect1 - cfg.learning_rate * -1.0 / (std::sqrt(vhat2) + cfg.epsilon);
  CHECK(net.layers[0].W(0, 0) == doctest::Approx(expect2).epsilon(1e-12));
  // Bias untouched by zero gradients.
  CHECK(net.layers[0].b(0) == 0.0);
}

#ifndef SHILLSIM_NN_HPP
#define SHILLSIM_NN_HPP

#include <Eigen/Dense>
#include <vector>

#include "shillsim/rng.hpp"

namespace shillsim {

inline constexpr double kLeakySlope = 0.2;

enum class Activation { kLeakyRelu, kSigmoid, kIdentity };

// Batched activation value, first and second derivative.  Derivatives are
// expressed through pre-activation z and value a so they stay cheap:
// sigmoid' = a(1-a), sigmoid'' = a(1-a)(1-2a); the leaky slope is piecewise
// constant, so its second derivative vanishes almost everywhere.
Eigen::MatrixXd act_value(Activation act, const Eigen::MatrixXd& z);
Eigen::MatrixXd act_deriv(Activation act, const Eigen::MatrixXd& z,
                          const Eigen::MatrixXd& a);
Eigen::MatrixXd act_second(Activation act, const Eigen::MatrixXd& z,
                           const Eigen::MatrixXd& a);

struct AffineLayer {
  Eigen::MatrixXd W;     // in x out
  Eigen::RowVectorXd b;  // out
  Activation act = Activation::kLeakyRelu;
};

// Plain fully connected stack; rows of the in/out matrices are batch samples.
struct Mlp {
  std::vector<AffineLayer> layers;

  int input_dim() const {
    return static_cast<int>(layers.front().W.rows());
  }
  int output_dim() const {
    return static_cast<int>(layers.back().W.cols());
  }

  // Glorot-uniform weights, zero biases.  widths has one entry more than
  // activations.
  static Mlp xavier(const std::vector<int>& widths,
                    const std::vector<Activation>& activations, Rng& rng);
};

struct MlpTrace {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> z;  // pre-activations per layer
  std::vector<Eigen::MatrixXd> a;  // activations per layer
};

Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& x,
                            MlpTrace* trace = nullptr);

struct MlpGrads {
  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::RowVectorXd> b;

  static MlpGrads zeros_like(const Mlp& net);
  void add_scaled(const MlpGrads& other, double scale);
};

// Reverse pass from dL/d(output); accumulates parameter gradients and returns
// dL/d(input).
Eigen::MatrixXd mlp_backward(const Mlp& net, const MlpTrace& trace,
                             const Eigen::MatrixXd& dout, MlpGrads* grads);

// Row-major parameter serialization, layer by layer, weights before bias.
std::vector<double> flatten(const Mlp& net);
void unflatten(Mlp& net, const std::vector<double>& values);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.0;
  double beta2 = 0.9;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<Eigen::MatrixXd> mW, vW;
  std::vector<Eigen::RowVectorXd> mb, vb;
  long step = 0;

  static AdamState zeros_like(const Mlp& net);
};

void adam_step(Mlp& net, const MlpGrads& grads, AdamState& state,
               const AdamConfig& config);

}  // namespace shillsim

#endif

#ifndef SHILLSIM_GAN_HPP
#define SHILLSIM_GAN_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "shillsim/dataset.hpp"
#include "shillsim/itemgraph.hpp"
#include "shillsim/nn.hpp"
#include "shillsim/rng.hpp"

namespace shillsim {

// Rating generator.  Per profile slot the embedding net G_e turns noise into
// a feature row H, the link net G_l builds factors L_t whose Gram matrix
// L = L_t L_t^T is row-normalized into A; two rounds of aggregation
// R1 = A H + A (A H) mix features along the inferred item-item links, and the
// output net maps R1 to per-slot pseudo ratings (row means of its output).
struct GeneratorParams {
  Mlp embed;  // noise -> 128 -> 256 -> 64
  Mlp link;   // noise -> 128 -> 256 -> 32
  Mlp out;    // 64 -> 128
  bool conditional = false;
  // Profile-size cap the model was built for; fills the vitality input
  // k / cap when conditional.
  int condition_cap = 0;

  // Published layer widths, Glorot-uniform weights, zero biases.
  static GeneratorParams standard(bool conditional, int condition_cap,
                                  Rng& rng);
};

// Critic applied to each rating independently with shared weights; the
// profile score is the mean of the per-rating outputs.  Three logistic
// stages, leaky-rectified head.
struct DiscriminatorParams {
  Mlp critic;  // 1 -> 1024 -> 512 -> 256 -> 1

  static DiscriminatorParams standard(Rng& rng);
};

// One training sample: k noise draws, the matching real vector (per-item mean
// ratings of the sampled items, selected part first), and the vitality scalar
// k / cap for conditional models.
struct GanBatch {
  Eigen::VectorXd noise;
  Eigen::VectorXd real;
  double condition = 0.0;
};

GanBatch make_gan_batch(const SampledProfileItems& sampled,
                        const RatingsDataset& data, bool conditional, int cap,
                        Rng& rng);

struct GeneratorTrace {
  // Slots are processed in noise-sorted order so that permuting the inputs
  // permutes the outputs bit-for-bit; order[p] is the caller slot handled at
  // position p.  All matrices below live in processing order.
  std::vector<int> order;
  Eigen::MatrixXd input;  // k x (1 or 2)
  Eigen::MatrixXd H;      // k x 64
  Eigen::MatrixXd Lt;     // k x 32
  Eigen::MatrixXd L;      // k x k Gram matrix of Lt
  Eigen::MatrixXd A;      // row-normalized L
  Eigen::MatrixXd M;      // A H
  Eigen::MatrixXd R1;     // A H + A (A H)
  Eigen::MatrixXd R2;     // output-net activations, k x 128
  // Per-slot ratings in the caller's slot order.
  Eigen::VectorXd ratings;
  MlpTrace embed_trace, link_trace, out_trace;
};

GeneratorTrace generator_forward(const GeneratorParams& gen,
                                 const GanBatch& batch);

// Row-wise softmax; every row sums to one.
Eigen::MatrixXd link_normalize(const Eigen::MatrixXd& L);

struct CriticEval {
  Eigen::VectorXd per_rating;
  double mean = 0.0;
};

CriticEval discriminator_forward(const DiscriminatorParams& disc,
                                 const Eigen::VectorXd& ratings);

// Gradient of the profile score w.r.t. each input rating, i.e. the tangent of
// the shared critic at every slot divided by k.
Eigen::VectorXd critic_input_gradient(const DiscriminatorParams& disc,
                                      const Eigen::VectorXd& ratings);

struct GanLossConfig {
  double gradient_penalty_weight = 10.0;  // lambda
  double rating_penalty_weight = 10.0;    // psi
};

// Critic loss D(G(Z)) - D(X) plus the gradient penalty evaluated at the
// interpolate eps*X + (1-eps)*G(Z).
double loss_discriminator(const GeneratorParams& gen,
                          const DiscriminatorParams& disc,
                          const GanBatch& batch, double eps,
                          const GanLossConfig& cfg);
// Same value; fills the critic parameter gradient, including the second-order
// path through the gradient penalty.
double loss_discriminator_grad(const GeneratorParams& gen,
                               const DiscriminatorParams& disc,
                               const GanBatch& batch, double eps,
                               const GanLossConfig& cfg, MlpGrads* critic);

// Generator loss -D(G(Z)) + psi/k * ||G(Z) - X||^2.
double loss_generator(const GeneratorParams& gen,
                      const DiscriminatorParams& disc, const GanBatch& batch,
                      const GanLossConfig& cfg);
double loss_generator_grad(const GeneratorParams& gen,
                           const DiscriminatorParams& disc,
                           const GanBatch& batch, const GanLossConfig& cfg,
                           MlpGrads* embed, MlpGrads* link, MlpGrads* out);

struct GanTrainConfig {
  int epochs = 100;
  int critic_steps = 5;  // critic updates per generator update
  double learning_rate = 1e-3;
  GanLossConfig loss;
  bool conditional = false;
  AttackThresholds thresholds;  // max_ratings must be resolved (> 0)
  std::uint64_t seed = 0;
};

// Profile-size cap while training ramps up: half the cap for the first 50% of
// epochs, seven tenths for the next 20%, the full cap afterwards; never below
// the minimum profile size.
int effective_max_ratings(int epoch, int total_epochs, int cap,
                          int min_ratings);

struct GanEpochStats {
  int epoch;
  double loss_d;  // mean over the epoch's critic steps
  double loss_g;
  int cap_effective;
};

struct GanTrainResult {
  GeneratorParams generator;
  std::vector<GanEpochStats> history;
};

GanTrainResult train_gan(const RatingsDataset& train,
                         const ItemItemGraph& graph,
                         const GanTrainConfig& config);

// Continuous per-slot ratings for a sampled profile skeleton (selected part
// first, then filler, matching the sampled order).
Eigen::VectorXd generate_ratings(const GeneratorParams& gen,
                                 const SampledProfileItems& sampled,
                                 const RatingsDataset& data,
                                 std::uint64_t seed);

struct GeneratorCheckpoint {
  GeneratorParams params;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
};

// Self-describing JSON document with layer shapes, row-major values, the
// training config and seed.
void save_generator(const std::string& path, const GeneratorParams& gen,
                    const std::map<std::string, std::string>& config,
                    std::uint64_t seed);
GeneratorCheckpoint load_generator(const std::string& path);

void write_history_csv(const std::string& path,
                       const std::vector<GanEpochStats>& history);

}  // namespace shillsim

#endif

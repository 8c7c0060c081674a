#ifndef SHILLSIM_RECOMMENDER_HPP
#define SHILLSIM_RECOMMENDER_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shillsim/dataset.hpp"

namespace shillsim {

// Matrix-factorization ranker: one d-dimensional vector per user and item,
// preference score is their inner product.  Rated pairs count as implicit
// positives; rating values play no role in training.
struct MFModel {
  Eigen::MatrixXd user_vectors;  // users x d
  Eigen::MatrixXd item_vectors;  // items x d

  int dim() const { return static_cast<int>(user_vectors.cols()); }
  double score(int user, int item) const {
    return user_vectors.row(user).dot(item_vectors.row(item));
  }
};

enum class RecommenderKind { kBpr, kApr };
std::string recommender_kind_name(RecommenderKind kind);
RecommenderKind recommender_kind_from_name(const std::string& name);

struct AdversarialConfig {
  double perturb_magnitude = 0.5;  // norm of the parameter perturbation
  double adv_weight = 1.0;         // weight of the perturbed pairwise loss
};

struct RecTrainConfig {
  int d = 32;
  double learning_rate = 1e-3;
  int epochs = 10;
  int negatives_per_positive = 1;
  double l2 = 1e-4;
  std::optional<AdversarialConfig> adversarial;
  std::uint64_t seed = 0;
};

struct RecTrainObserver {
  // Called after every epoch with the mean pairwise loss (adversarial term
  // included, regularizer not) and the current parameters.
  std::function<void(int epoch, double mean_loss, const MFModel&)> on_epoch;
  // Called once per adversarial step with the realized perturbation norm.
  std::function<void(double norm)> on_perturbation;
};

// Stochastic pairwise-ranking descent over triples (user, rated item,
// unrated item); deterministic for a fixed seed.  Throws NumericError naming
// the epoch if parameters stop being finite.
MFModel train_bpr(const RatingsDataset& train, const RecTrainConfig& config,
                  const RecTrainObserver* observer = nullptr);

// BPR plus adversarial training: per step, the pairwise-loss gradient w.r.t.
// the three touched embedding rows is rescaled to perturb_magnitude, and the
// pairwise loss at the perturbed parameters joins the objective with weight
// adv_weight.  config.adversarial must be set.
MFModel train_apr(const RatingsDataset& train, const RecTrainConfig& config,
                  const RecTrainObserver* observer = nullptr);

// The n highest-scoring items outside `exclude`, descending score, item
// index breaking ties.
std::vector<int> recommend_top_n(const MFModel& model, int user, int n,
                                 const std::vector<int>& exclude);

struct RecommenderCheckpoint {
  MFModel model;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
};

void save_recommender(const std::string& path, const MFModel& model,
                      const std::map<std::string, std::string>& config,
                      std::uint64_t seed);
RecommenderCheckpoint load_recommender(const std::string& path);

}  // namespace shillsim

#endif

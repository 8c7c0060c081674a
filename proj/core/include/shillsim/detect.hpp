#ifndef SHILLSIM_DETECT_HPP
#define SHILLSIM_DETECT_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shillsim/dataset.hpp"

namespace shillsim {

struct DetectionReport {
  std::vector<int> flagged;    // user indices, ascending
  std::vector<double> scores;  // one per user; meaning recorded in config
  std::optional<double> precision;
  std::optional<double> recall;
  std::map<std::string, std::string> config;
};

// Fraction of flagged users that are truly fake, and fraction of fake users
// that were flagged.  Nothing flagged scores precision 0; an empty truth set
// scores recall 1.
std::pair<double, double> score_detection(const std::vector<int>& flagged,
                                          const std::vector<int>& fake_truth);

// Unsupervised principal-component detector.  Ratings are standardized per
// item (unrated cells stay zero), users are scored by their summed squared
// loadings on the top three principal directions of the user covariance, and
// the m least-loaded users are flagged.  Metrics are left unset.
DetectionReport detect_pca(const RatingsDataset& poisoned, int m);

// Per-user statistics of rated-item popularity, the raw material of the
// supervised detector.
struct UserFeatureVector {
  double mean_popularity = 0.0;
  double popularity_variance = 0.0;
  double bottom_decile_fraction = 0.0;
  double top_decile_fraction = 0.0;
  double rating_count = 0.0;
  double mean_rating = 0.0;
};

UserFeatureVector degreesad_features(const RatingsDataset& poisoned, int user);

// Supervised popularity-degree detector: a logistic classifier over
// UserFeatureVector, trained and evaluated by stratified k-fold
// cross-validation.  Out-of-fold fake probabilities become the scores, users
// crossing 0.5 are flagged, and precision/recall are filled in against the
// ground truth.
DetectionReport detect_degreesad(const RatingsDataset& poisoned,
                                 const std::vector<int>& fake_truth,
                                 int folds = 5);

}  // namespace shillsim

#endif

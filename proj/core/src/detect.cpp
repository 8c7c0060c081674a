#include "shillsim/detect.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "shillsim/errors.hpp"

namespace shillsim {

std::pair<double, double> score_detection(const std::vector<int>& flagged,
                                          const std::vector<int>& fake_truth) {
  std::set<int> f(flagged.begin(), flagged.end());
  std::set<int> t(fake_truth.begin(), fake_truth.end());
  std::size_t tp = 0;
  for (int u : f) {
    if (t.count(u)) ++tp;
  }
  double precision =
      f.empty() ? 0.0 : static_cast<double>(tp) / static_cast<double>(f.size());
  double recall =
      t.empty() ? 1.0 : static_cast<double>(tp) / static_cast<double>(t.size());
  return {precision, recall};
}

namespace {

// Ratings standardized within each item; unrated cells stay at zero, exactly
// where a rating equal to the item mean would land.
Eigen::MatrixXd standardized_matrix(const RatingsDataset& data) {
  const int users = data.user_count();
  const int items = data.item_count();
  Eigen::VectorXd mean(items), sd(items);
  for (int i = 0; i < items; ++i) {
    mean(i) = data.per_item_mean(i);
    sd(i) = std::sqrt(data.per_item_variance(i));
  }
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(users, items);
  for (int u = 0; u < users; ++u) {
    for (const auto& r : data.user_ratings(u)) {
      if (sd(r.item) > 0.0) {
        x(u, r.item) = (r.rating - mean(r.item)) / sd(r.item);
      }
    }
  }
  return x;
}

}  // namespace

DetectionReport detect_pca(const RatingsDataset& poisoned, int m) {
  const int users = poisoned.user_count();
  if (users < 2) throw UsageError("pca detection needs at least two users");
  if (m < 0) throw UsageError("cannot flag a negative number of users");
  if (m > users) {
    throw UsageError("cannot flag " + std::to_string(m) + " of " +
                     std::to_string(users) + " users");
  }

  Eigen::MatrixXd x = standardized_matrix(poisoned);
  Eigen::MatrixXd cov = x * x.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) {
    throw NumericError("eigendecomposition failed in pca detection");
  }

  // Eigenvalues arrive ascending; keep up to three informative directions
  // from the top, ignoring numerically null ones.
  const double tol =
      1e-12 * std::max(1.0, es.eigenvalues()(users - 1));
  DetectionReport report;
  report.scores.assign(users, 0.0);
  int components = 0;
  for (int k = 0; k < 3 && k < users; ++k) {
    int col = users - 1 - k;
    if (es.eigenvalues()(col) <= tol) break;
    ++components;
    for (int u = 0; u < users; ++u) {
      double v = es.eigenvectors()(u, col);
      report.scores[u] += v * v;
    }
  }

  std::vector<int> order(users);
  for (int u = 0; u < users; ++u) order[u] = u;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return report.scores[a] < report.scores[b];
  });
  report.flagged.assign(order.begin(), order.begin() + m);
  std::sort(report.flagged.begin(), report.flagged.end());
  report.config = {{"detector", "pca"},
                   {"m", std::to_string(m)},
                   {"components", std::to_string(components)},
                   {"score", "top_component_loading"}};
  return report;
}

namespace {

struct DecileThresholds {
  int low = 0;
  int high = 0;
};

// Nearest-rank 10th and 90th percentiles of item popularity.
DecileThresholds popularity_deciles(const RatingsDataset& data) {
  std::vector<int> pops;
  pops.reserve(data.item_count());
  for (int i = 0; i < data.item_count(); ++i) {
    pops.push_back(data.per_item_count(i));
  }
  std::sort(pops.begin(), pops.end());
  DecileThresholds t;
  if (pops.empty()) return t;
  int n = static_cast<int>(pops.size());
  auto rank = [n](double q) {
    int r = static_cast<int>(std::ceil(q * n));
    return std::clamp(r - 1, 0, n - 1);
  };
  t.low = pops[rank(0.1)];
  t.high = pops[rank(0.9)];
  return t;
}

UserFeatureVector features_with(const RatingsDataset& data, int user,
                                const DecileThresholds& t) {
  UserFeatureVector f;
  const auto& rows = data.user_ratings(user);
  if (rows.empty()) return f;
  double n = static_cast<double>(rows.size());
  double low = 0.0, top = 0.0;
  for (const auto& r : rows) {
    int pop = data.per_item_count(r.item);
    f.mean_popularity += pop;
    f.mean_rating += r.rating;
    if (pop <= t.low) low += 1.0;
    if (pop >= t.high) top += 1.0;
  }
  f.mean_popularity /= n;
  f.mean_rating /= n;
  for (const auto& r : rows) {
    double d = data.per_item_count(r.item) - f.mean_popularity;
    f.popularity_variance += d * d;
  }
  f.popularity_variance /= n;
  f.bottom_decile_fraction = low / n;
  f.top_decile_fraction = top / n;
  f.rating_count = n;
  return f;
}

}  // namespace

UserFeatureVector degreesad_features(const RatingsDataset& poisoned,
                                     int user) {
  if (user < 0 || user >= poisoned.user_count()) {
    throw UsageError("unknown user index " + std::to_string(user));
  }
  return features_with(poisoned, user, popularity_deciles(poisoned));
}

namespace {

constexpr int kFeatureCount = 6;
constexpr int kLogisticIterations = 300;
constexpr double kLogisticRate = 0.5;
constexpr double kLogisticL2 = 1e-3;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

Eigen::RowVectorXd as_row(const UserFeatureVector& f) {
  Eigen::RowVectorXd r(kFeatureCount);
  r << f.mean_popularity, f.popularity_variance, f.bottom_decile_fraction,
      f.top_decile_fraction, f.rating_count, f.mean_rating;
  return r;
}

}  // namespace

DetectionReport detect_degreesad(const RatingsDataset& poisoned,
                                 const std::vector<int>& fake_truth,
                                 int folds) {
  const int users = poisoned.user_count();
  if (folds < 2) throw UsageError("cross-validation needs at least two folds");
  std::set<int> fake(fake_truth.begin(), fake_truth.end());
  for (int u : fake) {
    if (u < 0 || u >= users) {
      throw UsageError("fake label " + std::to_string(u) +
                       " is outside the user range");
    }
  }
  if (fake.empty() || static_cast<int>(fake.size()) == users) {
    throw DataError("ground truth labels contain a single class");
  }

  DecileThresholds deciles = popularity_deciles(poisoned);
  Eigen::MatrixXd feats(users, kFeatureCount);
  Eigen::VectorXd label(users);
  for (int u = 0; u < users; ++u) {
    feats.row(u) = as_row(features_with(poisoned, u, deciles));
    label(u) = fake.count(u) ? 1.0 : 0.0;
  }

  // Stratified assignment: each class is dealt round-robin across folds in
  // user order, so every split keeps both classes in proportion.
  std::vector<int> fold_of(users);
  int next_fake = 0, next_real = 0;
  for (int u = 0; u < users; ++u) {
    if (label(u) > 0.5) {
      fold_of[u] = next_fake++ % folds;
    } else {
      fold_of[u] = next_real++ % folds;
    }
  }

  DetectionReport report;
  report.scores.assign(users, 0.0);
  for (int f = 0; f < folds; ++f) {
    std::vector<int> train, test;
    for (int u = 0; u < users; ++u) {
      (fold_of[u] == f ? test : train).push_back(u);
    }
    if (test.empty()) continue;

    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(kFeatureCount);
    for (int u : train) mean += feats.row(u);
    mean /= static_cast<double>(train.size());
    Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(kFeatureCount);
    for (int u : train) {
      var += (feats.row(u) - mean).cwiseAbs2();
    }
    var /= static_cast<double>(train.size());
    Eigen::RowVectorXd scale(kFeatureCount);
    for (int c = 0; c < kFeatureCount; ++c) {
      scale(c) = var(c) > 1e-12 ? 1.0 / std::sqrt(var(c)) : 0.0;
    }
    auto standardize = [&](int u) -> Eigen::RowVectorXd {
      return (feats.row(u) - mean).cwiseProduct(scale);
    };

    Eigen::RowVectorXd w = Eigen::RowVectorXd::Zero(kFeatureCount);
    double b = 0.0;
    const double inv_n = 1.0 / static_cast<double>(train.size());
    for (int it = 0; it < kLogisticIterations; ++it) {
      Eigen::RowVectorXd gw = Eigen::RowVectorXd::Zero(kFeatureCount);
      double gb = 0.0;
      for (int u : train) {
        Eigen::RowVectorXd xu = standardize(u);
        double err = sigmoid(w.dot(xu) + b) - label(u);
        gw += err * xu;
        gb += err;
      }
      w -= kLogisticRate * (inv_n * gw + kLogisticL2 * w);
      b -= kLogisticRate * inv_n * gb;
    }

    for (int u : test) {
      double p = sigmoid(w.dot(standardize(u)) + b);
      report.scores[u] = p;
      if (p > 0.5) report.flagged.push_back(u);
    }
  }

  std::sort(report.flagged.begin(), report.flagged.end());
  std::vector<int> truth(fake.begin(), fake.end());
  auto [precision, recall] = score_detection(report.flagged, truth);
  report.precision = precision;
  report.recall = recall;
  report.config = {{"detector", "degree_sad"},
                   {"folds", std::to_string(folds)},
                   {"iterations", std::to_string(kLogisticIterations)},
                   {"learning_rate", "0.5"},
                   {"l2", "0.001"},
                   {"score", "fake_probability"}};
  return report;
}

}  // namespace shillsim

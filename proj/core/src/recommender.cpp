#include "shillsim/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <utility>

#include <json.hpp>

#include "shillsim/errors.hpp"
#include "shillsim/rng.hpp"

namespace shillsim {

using nlohmann::json;

std::string recommender_kind_name(RecommenderKind kind) {
  switch (kind) {
    case RecommenderKind::kBpr:
      return "BPR";
    case RecommenderKind::kApr:
      return "APR";
  }
  throw UsageError("unhandled recommender kind");
}

RecommenderKind recommender_kind_from_name(const std::string& name) {
  if (name == "BPR") return RecommenderKind::kBpr;
  if (name == "APR") return RecommenderKind::kApr;
  throw UsageError("unknown recommender kind: " + name);
}

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// -ln sigma(x) = softplus(-x), kept overflow-free on both tails.
double pairwise_loss(double x) {
  if (x > 0.0) return std::log1p(std::exp(-x));
  return -x + std::log1p(std::exp(x));
}

void validate(const RecTrainConfig& config, bool adversarial_required) {
  if (config.d < 1) throw UsageError("latent dimension must be positive");
  if (!(config.learning_rate > 0.0)) {
    throw UsageError("learning rate must be positive");
  }
  if (config.epochs < 1) throw UsageError("epochs must be positive");
  if (config.negatives_per_positive < 1) {
    throw UsageError("need at least one negative per positive");
  }
  if (config.l2 < 0.0) throw UsageError("l2 weight must not be negative");
  if (adversarial_required && !config.adversarial) {
    throw UsageError("adversarial settings are required for APR");
  }
  if (config.adversarial) {
    if (config.adversarial->perturb_magnitude < 0.0) {
      throw UsageError("perturbation magnitude must not be negative");
    }
    if (config.adversarial->adv_weight < 0.0) {
      throw UsageError("adversarial weight must not be negative");
    }
  }
}

MFModel train_core(const RatingsDataset& train, const RecTrainConfig& config,
                   bool with_adversary, const RecTrainObserver* observer) {
  validate(config, with_adversary);
  if (train.rating_count() == 0) {
    throw DataError("training set has no ratings");
  }
  const int users = train.user_count();
  const int items = train.item_count();
  const double lr = config.learning_rate;
  const double l2 = config.l2;
  const bool use_adv = with_adversary && config.adversarial->adv_weight > 0.0;
  const double eps = with_adversary ? config.adversarial->perturb_magnitude : 0.0;
  const double adv_w = with_adversary ? config.adversarial->adv_weight : 0.0;

  // Every rated pair is an implicit positive; users who rated the whole
  // catalog contribute no ranking triples.
  std::vector<std::pair<int, int>> positives;
  for (int u = 0; u < users; ++u) {
    if (train.per_user_count(u) >= items) continue;
    for (const auto& r : train.user_ratings(u)) {
      positives.emplace_back(u, r.item);
    }
  }
  if (positives.empty()) {
    throw DataError("no ranking triples: every user rated every item");
  }

  Rng rng(derive_seed(config.seed, "rec.train"));
  MFModel model;
  model.user_vectors.resize(users, config.d);
  model.item_vectors.resize(items, config.d);
  for (int r = 0; r < users; ++r) {
    for (int c = 0; c < config.d; ++c) {
      model.user_vectors(r, c) = rng.normal(0.0, 0.1);
    }
  }
  for (int r = 0; r < items; ++r) {
    for (int c = 0; c < config.d; ++c) {
      model.item_vectors(r, c) = rng.normal(0.0, 0.1);
    }
  }

  std::vector<std::vector<int>> unrated_cache(users);
  auto draw_negative = [&](int u) {
    for (int attempt = 0; attempt < 32; ++attempt) {
      int j = static_cast<int>(rng.below(items));
      if (!train.is_rated(u, j)) return j;
    }
    auto& list = unrated_cache[u];
    if (list.empty()) {
      for (int j = 0; j < items; ++j) {
        if (!train.is_rated(u, j)) list.push_back(j);
      }
    }
    return list[rng.below(list.size())];
  };

  std::vector<std::size_t> order(positives.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::int64_t steps = 0;
    for (std::size_t idx : order) {
      auto [u, pos] = positives[idx];
      for (int t = 0; t < config.negatives_per_positive; ++t) {
        int neg = draw_negative(u);
        Eigen::RowVectorXd w = model.user_vectors.row(u);
        Eigen::RowVectorXd hp = model.item_vectors.row(pos);
        Eigen::RowVectorXd hn = model.item_vectors.row(neg);
        Eigen::RowVectorXd diff = hp - hn;
        double x = w.dot(diff);
        double coef = 1.0 - stable_sigmoid(x);
        Eigen::RowVectorXd gw = -coef * diff;
        Eigen::RowVectorXd gp = -coef * w;
        Eigen::RowVectorXd gn = coef * w;
        double loss = pairwise_loss(x);

        Eigen::RowVectorXd tw = gw;
        Eigen::RowVectorXd tp = gp;
        Eigen::RowVectorXd tn = gn;
        if (use_adv) {
          double norm = std::sqrt(gw.squaredNorm() + gp.squaredNorm() +
                                  gn.squaredNorm());
          double scale = norm > 1e-12 ? eps / norm : 0.0;
          Eigen::RowVectorXd dw = scale * gw;
          Eigen::RowVectorXd dp = scale * gp;
          Eigen::RowVectorXd dn = scale * gn;
          if (observer && observer->on_perturbation) {
            observer->on_perturbation(std::sqrt(
                dw.squaredNorm() + dp.squaredNorm() + dn.squaredNorm()));
          }
          Eigen::RowVectorXd wp = w + dw;
          Eigen::RowVectorXd diffp = (hp + dp) - (hn + dn);
          double xp = wp.dot(diffp);
          double coefp = 1.0 - stable_sigmoid(xp);
          tw += adv_w * (-coefp * diffp);
          tp += adv_w * (-coefp * wp);
          tn += adv_w * (coefp * wp);
          loss += adv_w * pairwise_loss(xp);
        }

        model.user_vectors.row(u) = w - lr * (tw + l2 * w);
        model.item_vectors.row(pos) = hp - lr * (tp + l2 * hp);
        model.item_vectors.row(neg) = hn - lr * (tn + l2 * hn);
        loss_sum += loss;
        ++steps;
      }
    }
    if (!model.user_vectors.allFinite() || !model.item_vectors.allFinite()) {
      throw NumericError("parameters diverged at epoch " +
                         std::to_string(epoch));
    }
    if (observer && observer->on_epoch) {
      observer->on_epoch(epoch, loss_sum / static_cast<double>(steps), model);
    }
  }
  return model;
}

}  // namespace

MFModel train_bpr(const RatingsDataset& train, const RecTrainConfig& config,
                  const RecTrainObserver* observer) {
  return train_core(train, config, false, observer);
}

MFModel train_apr(const RatingsDataset& train, const RecTrainConfig& config,
                  const RecTrainObserver* observer) {
  return train_core(train, config, true, observer);
}

std::vector<int> recommend_top_n(const MFModel& model, int user, int n,
                                 const std::vector<int>& exclude) {
  const int users = static_cast<int>(model.user_vectors.rows());
  const int items = static_cast<int>(model.item_vectors.rows());
  if (user < 0 || user >= users) {
    throw UsageError("unknown user index " + std::to_string(user));
  }
  if (n < 0) throw UsageError("cannot recommend a negative number of items");
  std::vector<char> banned(items, 0);
  for (int i : exclude) {
    if (i >= 0 && i < items) banned[i] = 1;
  }
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(items);
  for (int i = 0; i < items; ++i) {
    if (!banned[i]) ranked.emplace_back(model.score(user, i), i);
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const std::pair<double, int>& a,
               const std::pair<double, int>& b) {
              if (a.first != b.first) return a.first > b.first;
              return a.second < b.second;
            });
  std::vector<int> out;
  const int take = std::min<int>(n, static_cast<int>(ranked.size()));
  out.reserve(take);
  for (int p = 0; p < take; ++p) out.push_back(ranked[p].second);
  return out;
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json values = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
  }
  return values;
}

Eigen::MatrixXd matrix_from_json(const json& values, int rows, int cols) {
  if (static_cast<int>(values.size()) != rows * cols) {
    throw DataError("checkpoint matrix has wrong element count");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = values.at(k++).get<double>();
  }
  return m;
}

}  // namespace

void save_recommender(const std::string& path, const MFModel& model,
                      const std::map<std::string, std::string>& config,
                      std::uint64_t seed) {
  json j;
  j["format"] = "shillsim-recommender";
  j["version"] = 1;
  j["seed"] = seed;
  j["config"] = config;
  j["model"]["users"] = model.user_vectors.rows();
  j["model"]["items"] = model.item_vectors.rows();
  j["model"]["d"] = model.dim();
  j["model"]["user_values"] = matrix_to_json(model.user_vectors);
  j["model"]["item_values"] = matrix_to_json(model.item_vectors);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(1) << "\n";
  if (!out) throw DataError("failed while writing " + path);
}

RecommenderCheckpoint load_recommender(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  try {
    if (j.at("format") != "shillsim-recommender") {
      throw DataError(path + ": not a recommender checkpoint");
    }
    if (j.at("version").get<int>() != 1) {
      throw DataError(path + ": unsupported checkpoint version");
    }
    RecommenderCheckpoint cp;
    cp.seed = j.at("seed").get<std::uint64_t>();
    cp.config =
        j.at("config").get<std::map<std::string, std::string>>();
    const json& m = j.at("model");
    int users = m.at("users").get<int>();
    int items = m.at("items").get<int>();
    int d = m.at("d").get<int>();
    cp.model.user_vectors = matrix_from_json(m.at("user_values"), users, d);
    cp.model.item_vectors = matrix_from_json(m.at("item_values"), items, d);
    return cp;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace shillsim

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "shillsim/dataset.hpp"
#include "shillsim/errors.hpp"
#include "shillsim/recommender.hpp"
#include "shillsim/rng.hpp"
#include "testutil.hpp"

using namespace shillsim;

namespace {

// One user, two items, a single rated pair.  The only trainable triple is
// (u0, i0, i1), so every epoch is exactly one fully determined step.
RatingsDataset single_pair_data() {
  RatingsDataset d;
  int u = d.intern_user("u0");
  int a = d.intern_item("i0");
  d.intern_item("i1");
  d.add_rating(u, a, 5);
  return d;
}

// Two users with disjoint single positives.  u1's rating is one star on
// purpose: rated-at-all is what makes a positive, not the star value.
RatingsDataset separable_data() {
  RatingsDataset d;
  int u0 = d.intern_user("u0");
  int u1 = d.intern_user("u1");
  int i0 = d.intern_item("i0");
  int i1 = d.intern_item("i1");
  d.add_rating(u0, i0, 5);
  d.add_rating(u1, i1, 1);
  return d;
}

RatingsDataset random_ratings(int users, int items, std::uint64_t seed) {
  RatingsDataset d;
  for (int u = 0; u < users; ++u) d.intern_user("u" + std::to_string(u));
  for (int i = 0; i < items; ++i) d.intern_item("i" + std::to_string(i));
  Rng rng(seed);
  std::vector<int> pool(items);
  for (int i = 0; i < items; ++i) pool[i] = i;
  for (int u = 0; u < users; ++u) {
    int count = std::min(items - 1, 4 + static_cast<int>(rng.below(4)));
    for (int i : rng.sample(pool, count)) {
      d.add_rating(u, i, 1 + static_cast<int>(rng.below(5)));
    }
  }
  return d;
}

double sigmoid_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Pairwise ranking loss -ln sigma(x), computed the naive way; fine for the
// moderate margins these fixtures produce.
double pair_loss_ref(double x) { return -std::log(sigmoid_ref(x)); }

// Ranking quality on the training positives: over all (rated, unrated) item
// pairs of each user, the fraction ranked correctly, ties worth half.
double auc_on_train(const MFModel& model, const RatingsDataset& data) {
  double wins = 0.0;
  double pairs = 0.0;
  for (int u = 0; u < data.user_count(); ++u) {
    for (const auto& r : data.user_ratings(u)) {
      double sp = model.score(u, r.item);
      for (int j = 0; j < data.item_count(); ++j) {
        if (data.is_rated(u, j)) continue;
        double sn = model.score(u, j);
        if (sp > sn) {
          wins += 1.0;
        } else if (sp == sn) {
          wins += 0.5;
        }
        pairs += 1.0;
      }
    }
  }
  REQUIRE(pairs > 0.0);
  return wins / pairs;
}

// Reference ranking: full sort of every non-excluded item, score descending,
// index ascending on ties.
std::vector<int> top_n_oracle(const MFModel& model, int user, int n,
                              const std::vector<int>& exclude) {
  std::vector<char> banned(model.item_vectors.rows(), 0);
  for (int i : exclude) {
    if (i >= 0 && i < static_cast<int>(banned.size())) banned[i] = 1;
  }
  std::vector<std::pair<double, int>> order;
  for (int i = 0; i < static_cast<int>(banned.size()); ++i) {
    if (!banned[i]) order.emplace_back(model.score(user, i), i);
  }
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<int> out;
  for (int p = 0; p < std::min<int>(n, order.size()); ++p) {
    out.push_back(order[p].second);
  }
  return out;
}

struct StepRows {
  std::vector<double> w, hp, hn;
  double loss = 0.0;
};

StepRows rows_of(const MFModel& m, int u, int ip, int in) {
  StepRows s;
  int d = m.dim();
  for (int c = 0; c < d; ++c) {
    s.w.push_back(m.user_vectors(u, c));
    s.hp.push_back(m.item_vectors(ip, c));
    s.hn.push_back(m.item_vectors(in, c));
  }
  return s;
}

// Scalar-loop re-derivation of one pairwise descent step, sharing no code
// with the library.
StepRows hand_bpr_step(const StepRows& s, double lr, double l2) {
  int d = static_cast<int>(s.w.size());
  double x = 0.0;
  for (int c = 0; c < d; ++c) x += s.w[c] * (s.hp[c] - s.hn[c]);
  double coef = 1.0 - sigmoid_ref(x);
  StepRows out = s;
  for (int c = 0; c < d; ++c) {
    double gw = -coef * (s.hp[c] - s.hn[c]);
    double gp = -coef * s.w[c];
    double gn = coef * s.w[c];
    out.w[c] = s.w[c] - lr * (gw + l2 * s.w[c]);
    out.hp[c] = s.hp[c] - lr * (gp + l2 * s.hp[c]);
    out.hn[c] = s.hn[c] - lr * (gn + l2 * s.hn[c]);
  }
  out.loss = pair_loss_ref(x);
  return out;
}

// Same for the adversarial variant: gradient direction scaled to eps, the
// perturbed pairwise loss added with the given weight.
StepRows hand_apr_step(const StepRows& s, double lr, double l2, double eps,
                       double weight) {
  int d = static_cast<int>(s.w.size());
  double x = 0.0;
  for (int c = 0; c < d; ++c) x += s.w[c] * (s.hp[c] - s.hn[c]);
  double coef = 1.0 - sigmoid_ref(x);
  std::vector<double> gw(d), gp(d), gn(d);
  double norm_sq = 0.0;
  for (int c = 0; c < d; ++c) {
    gw[c] = -coef * (s.hp[c] - s.hn[c]);
    gp[c] = -coef * s.w[c];
    gn[c] = coef * s.w[c];
    norm_sq += gw[c] * gw[c] + gp[c] * gp[c] + gn[c] * gn[c];
  }
  double norm = std::sqrt(norm_sq);
  double scale = norm > 1e-12 ? eps / norm : 0.0;
  std::vector<double> wp(d), hpp(d), hnp(d);
  double xp = 0.0;
  for (int c = 0; c < d; ++c) {
    wp[c] = s.w[c] + scale * gw[c];
    hpp[c] = s.hp[c] + scale * gp[c];
    hnp[c] = s.hn[c] + scale * gn[c];
    xp += wp[c] * (hpp[c] - hnp[c]);
  }
  double coefp = 1.0 - sigmoid_ref(xp);
  StepRows out = s;
  for (int c = 0; c < d; ++c) {
    double tw = gw[c] + weight * (-coefp * (hpp[c] - hnp[c]));
    double tp = gp[c] + weight * (-coefp * wp[c]);
    double tn = gn[c] + weight * (coefp * wp[c]);
    out.w[c] = s.w[c] - lr * (tw + l2 * s.w[c]);
    out.hp[c] = s.hp[c] - lr * (tp + l2 * s.hp[c]);
    out.hn[c] = s.hn[c] - lr * (tn + l2 * s.hn[c]);
  }
  out.loss = pair_loss_ref(x) + weight * pair_loss_ref(xp);
  return out;
}

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("recommender kind names round-trip") {
  CHECK(recommender_kind_name(RecommenderKind::kBpr) == "BPR");
  CHECK(recommender_kind_name(RecommenderKind::kApr) == "APR");
  CHECK(recommender_kind_from_name("BPR") == RecommenderKind::kBpr);
  CHECK(recommender_kind_from_name("APR") == RecommenderKind::kApr);
  CHECK_THROWS_AS(recommender_kind_from_name("bpr"), UsageError);
  CHECK_THROWS_AS(recommender_kind_from_name("SVD"), UsageError);
}

TEST_CASE("training configuration is validated") {
  RatingsDataset data = separable_data();
  RecTrainConfig cfg;
  cfg.epochs = 1;

  SUBCASE("bad hyperparameters") {
    RecTrainConfig c = cfg;
    c.d = 0;
    CHECK_THROWS_AS(train_bpr(data, c), UsageError);
    c = cfg;
    c.learning_rate = 0.0;
    CHECK_THROWS_AS(train_bpr(data, c), UsageError);
    c = cfg;
    c.learning_rate = -1.0;
    CHECK_THROWS_AS(train_bpr(data, c), UsageError);
    c = cfg;
    c.epochs = 0;
    CHECK_THROWS_AS(train_bpr(data, c), UsageError);
    c = cfg;
    c.negatives_per_positive = 0;
    CHECK_THROWS_AS(train_bpr(data, c), UsageError);
    c = cfg;
    c.l2 = -1e-4;
    CHECK_THROWS_AS(train_bpr(data, c), UsageError);
  }

  SUBCASE("adversarial settings") {
    CHECK_THROWS_AS(train_apr(data, cfg), UsageError);
    RecTrainConfig c = cfg;
    c.adversarial = AdversarialConfig{-0.1, 1.0};
    CHECK_THROWS_AS(train_apr(data, c), UsageError);
    c.adversarial = AdversarialConfig{0.5, -1.0};
    CHECK_THROWS_AS(train_apr(data, c), UsageError);
  }

  SUBCASE("unusable data") {
    RatingsDataset empty;
    CHECK_THROWS_AS(train_bpr(empty, cfg), DataError);

    RatingsDataset full;
    int a = full.intern_user("a");
    int b = full.intern_user("b");
    int x = full.intern_item("x");
    int y = full.intern_item("y");
    full.add_rating(a, x, 3);
    full.add_rating(a, y, 4);
    full.add_rating(b, x, 2);
    full.add_rating(b, y, 5);
    CHECK_THROWS_AS(train_bpr(full, cfg), DataError);
  }
}

TEST_CASE("one epoch yields finite parameters of the right shape") {
  RatingsDataset data = separable_data();
  RecTrainConfig cfg;
  cfg.d = 3;
  cfg.epochs = 1;
  cfg.seed = 5;
  MFModel m = train_bpr(data, cfg);
  CHECK(m.user_vectors.rows() == 2);
  CHECK(m.user_vectors.cols() == 3);
  CHECK(m.item_vectors.rows() == 2);
  CHECK(m.item_vectors.cols() == 3);
  CHECK(m.dim() == 3);
  CHECK(m.user_vectors.allFinite());
  CHECK(m.item_vectors.allFinite());
}

TEST_CASE("separable preferences are learned from implicit positives") {
  RatingsDataset data = separable_data();
  RecTrainConfig cfg;
  cfg.d = 8;
  cfg.learning_rate = 0.05;
  cfg.epochs = 200;
  cfg.l2 = 1e-4;
  cfg.seed = 11;
  MFModel m = train_bpr(data, cfg);
  CHECK(m.score(0, 0) > m.score(0, 1));
  CHECK(m.score(1, 1) > m.score(1, 0));
}

TEST_CASE("a training step matches a hand-computed update") {
  RatingsDataset data = single_pair_data();
  RecTrainConfig cfg;
  cfg.d = 4;
  cfg.learning_rate = 0.1;
  cfg.epochs = 2;
  cfg.seed = 21;

  SUBCASE("with regularization") {
    cfg.l2 = 0.03;
    std::vector<MFModel> snaps;
    std::vector<double> losses;
    RecTrainObserver obs;
    obs.on_epoch = [&](int, double loss, const MFModel& m) {
      snaps.push_back(m);
      losses.push_back(loss);
    };
    train_bpr(data, cfg, &obs);
    REQUIRE(snaps.size() == 2);

    StepRows before = rows_of(snaps[0], 0, 0, 1);
    StepRows expect = hand_bpr_step(before, cfg.learning_rate, cfg.l2);
    StepRows after = rows_of(snaps[1], 0, 0, 1);
    for (int c = 0; c < cfg.d; ++c) {
      CHECK(after.w[c] == doctest::Approx(expect.w[c]).epsilon(1e-12));
      CHECK(after.hp[c] == doctest::Approx(expect.hp[c]).epsilon(1e-12));
      CHECK(after.hn[c] == doctest::Approx(expect.hn[c]).epsilon(1e-12));
    }
    CHECK(losses[1] == doctest::Approx(expect.loss).epsilon(1e-12));
  }

  SUBCASE("item deltas are antisymmetric without regularization") {
    cfg.l2 = 0.0;
    std::vector<MFModel> snaps;
    RecTrainObserver obs;
    obs.on_epoch = [&](int, double, const MFModel& m) { snaps.push_back(m); };
    train_bpr(data, cfg, &obs);
    REQUIRE(snaps.size() == 2);
    Eigen::RowVectorXd dp = snaps[1].item_vectors.row(0) -
                            snaps[0].item_vectors.row(0);
    Eigen::RowVectorXd dn = snaps[1].item_vectors.row(1) -
                            snaps[0].item_vectors.row(1);
    CHECK((dp + dn).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(dp.cwiseAbs().maxCoeff() > 0.0);
  }
}

TEST_CASE("the adversarial step matches a hand-computed update") {
  RatingsDataset data = single_pair_data();
  RecTrainConfig cfg;
  cfg.d = 4;
  cfg.learning_rate = 0.1;
  cfg.l2 = 0.02;
  cfg.epochs = 2;
  cfg.seed = 33;
  cfg.adversarial = AdversarialConfig{0.5, 1.0};

  std::vector<MFModel> snaps;
  std::vector<double> losses;
  RecTrainObserver obs;
  obs.on_epoch = [&](int, double loss, const MFModel& m) {
    snaps.push_back(m);
    losses.push_back(loss);
  };
  train_apr(data, cfg, &obs);
  REQUIRE(snaps.size() == 2);

  StepRows before = rows_of(snaps[0], 0, 0, 1);
  StepRows expect = hand_apr_step(before, cfg.learning_rate, cfg.l2,
                                  cfg.adversarial->perturb_magnitude,
                                  cfg.adversarial->adv_weight);
  StepRows after = rows_of(snaps[1], 0, 0, 1);
  for (int c = 0; c < cfg.d; ++c) {
    CHECK(after.w[c] == doctest::Approx(expect.w[c]).epsilon(1e-12));
    CHECK(after.hp[c] == doctest::Approx(expect.hp[c]).epsilon(1e-12));
    CHECK(after.hn[c] == doctest::Approx(expect.hn[c]).epsilon(1e-12));
  }
  CHECK(losses[1] == doctest::Approx(expect.loss).epsilon(1e-12));
}

TEST_CASE("training is deterministic in the seed") {
  RatingsDataset data = random_ratings(12, 10, 77);
  RecTrainConfig cfg;
  cfg.d = 6;
  cfg.epochs = 4;
  cfg.seed = 99;
  MFModel a = train_bpr(data, cfg);
  MFModel b = train_bpr(data, cfg);
  CHECK(max_abs_diff(a.user_vectors, b.user_vectors) == 0.0);
  CHECK(max_abs_diff(a.item_vectors, b.item_vectors) == 0.0);

  cfg.seed = 100;
  MFModel c = train_bpr(data, cfg);
  CHECK(max_abs_diff(a.user_vectors, c.user_vectors) > 0.0);
}

TEST_CASE("ranking quality improves over epochs") {
  RatingsDataset data = random_ratings(20, 15, 3);
  const std::array<int, 4> checkpoints{1, 5, 10, 20};
  std::array<std::vector<double>, 4> auc;

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RecTrainConfig cfg;
    cfg.d = 8;
    cfg.learning_rate = 0.05;
    cfg.epochs = 20;
    cfg.negatives_per_positive = 2;
    cfg.seed = 1000 + seed;
    RecTrainObserver obs;
    obs.on_epoch = [&](int epoch, double, const MFModel& m) {
      for (std::size_t k = 0; k < checkpoints.size(); ++k) {
        if (epoch == checkpoints[k]) auc[k].push_back(auc_on_train(m, data));
      }
    };
    train_bpr(data, cfg, &obs);
  }

  std::array<double, 4> med{};
  for (std::size_t k = 0; k < 4; ++k) {
    REQUIRE(auc[k].size() == 5);
    std::sort(auc[k].begin(), auc[k].end());
    med[k] = auc[k][2];
  }
  CHECK(med[3] >= med[0] + 0.02);
  for (std::size_t k = 1; k < 4; ++k) {
    CHECK(med[k] >= med[k - 1] - 0.02);
  }
}

TEST_CASE("divergent settings raise a numeric error naming the epoch") {
  RatingsDataset data = random_ratings(20, 15, 3);
  RecTrainConfig cfg;
  cfg.d = 4;
  cfg.learning_rate = 1e6;
  cfg.l2 = 1e-2;
  cfg.epochs = 50;
  cfg.seed = 8;
  CHECK_THROWS_WITH_AS(train_bpr(data, cfg), doctest::Contains("epoch"),
                       NumericError);
}

TEST_CASE("zero adversarial weight reproduces plain training bitwise") {
  RatingsDataset data = random_ratings(15, 12, 51);
  RecTrainConfig cfg;
  cfg.d = 5;
  cfg.epochs = 3;
  cfg.seed = 123;
  MFModel plain = train_bpr(data, cfg);

  cfg.adversarial = AdversarialConfig{0.5, 0.0};
  int perturb_calls = 0;
  RecTrainObserver obs;
  obs.on_perturbation = [&](double) { ++perturb_calls; };
  MFModel adv = train_apr(data, cfg, &obs);

  CHECK(max_abs_diff(plain.user_vectors, adv.user_vectors) == 0.0);
  CHECK(max_abs_diff(plain.item_vectors, adv.item_vectors) == 0.0);
  CHECK(perturb_calls == 0);
}

TEST_CASE("zero perturbation magnitude doubles the pairwise objective") {
  RatingsDataset data = single_pair_data();
  RecTrainConfig cfg;
  cfg.d = 4;
  cfg.epochs = 1;
  cfg.l2 = 1e-3;
  cfg.seed = 17;

  double plain_loss = 0.0;
  RecTrainObserver obs;
  obs.on_epoch = [&](int, double loss, const MFModel&) { plain_loss = loss; };
  train_bpr(data, cfg, &obs);

  cfg.adversarial = AdversarialConfig{0.0, 1.0};
  double adv_loss = 0.0;
  std::vector<double> norms;
  RecTrainObserver obs2;
  obs2.on_epoch = [&](int, double loss, const MFModel&) { adv_loss = loss; };
  obs2.on_perturbation = [&](double norm) { norms.push_back(norm); };
  train_apr(data, cfg, &obs2);

  CHECK(plain_loss > 0.0);
  CHECK(adv_loss == doctest::Approx(2.0 * plain_loss).epsilon(1e-12));
  REQUIRE(norms.size() == 1);
  CHECK(norms[0] == 0.0);
}

TEST_CASE("perturbation norms equal the configured magnitude") {
  RatingsDataset data = random_ratings(15, 12, 51);
  RecTrainConfig cfg;
  cfg.d = 5;
  cfg.epochs = 3;
  cfg.seed = 123;
  cfg.adversarial = AdversarialConfig{0.5, 1.0};

  std::vector<double> norms;
  RecTrainObserver obs;
  obs.on_perturbation = [&](double norm) { norms.push_back(norm); };
  MFModel adv = train_apr(data, cfg, &obs);

  std::int64_t steps = cfg.epochs * data.rating_count() *
                       cfg.negatives_per_positive;
  CHECK(static_cast<std::int64_t>(norms.size()) == steps);
  for (double n : norms) {
    CHECK(std::abs(n - 0.5) < 1e-9);
  }

  MFModel plain = train_bpr(data, cfg);
  CHECK(max_abs_diff(plain.user_vectors, adv.user_vectors) > 0.0);
}

TEST_CASE("top-n recommendations follow score then index order") {
  MFModel m;
  m.user_vectors.resize(2, 1);
  m.user_vectors << 1.0, -1.0;
  m.item_vectors.resize(5, 1);
  m.item_vectors << 3.0, 1.0, 3.0, 2.0, 5.0;

  SUBCASE("hand-checked rankings") {
    CHECK(recommend_top_n(m, 0, 3, {}) == std::vector<int>{4, 0, 2});
    CHECK(recommend_top_n(m, 0, 3, {4}) == std::vector<int>{0, 2, 3});
    CHECK(recommend_top_n(m, 0, 10, {}) == std::vector<int>{4, 0, 2, 3, 1});
    CHECK(recommend_top_n(m, 0, 0, {}).empty());
    CHECK(recommend_top_n(m, 1, 2, {}) == std::vector<int>{1, 3});
    CHECK(recommend_top_n(m, 0, 2, {0, 2, 4, 3, 1}).empty());
  }

  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(recommend_top_n(m, -1, 3, {}), UsageError);
    CHECK_THROWS_AS(recommend_top_n(m, 2, 3, {}), UsageError);
    CHECK_THROWS_AS(recommend_top_n(m, 0, -1, {}), UsageError);
  }

  SUBCASE("matches a full-sort reference on random scores") {
    Rng rng(6);
    MFModel big;
    big.user_vectors.resize(3, 4);
    big.item_vectors.resize(30, 4);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) big.user_vectors(r, c) = rng.normal();
    }
    for (int r = 0; r < 30; ++r) {
      for (int c = 0; c < 4; ++c) big.item_vectors(r, c) = rng.normal();
    }
    std::vector<int> exclude{3, 7, 7, 29, 40, -2};
    for (int u = 0; u < 3; ++u) {
      for (int n : {1, 5, 10, 30, 50}) {
        CHECK(recommend_top_n(big, u, n, exclude) ==
              top_n_oracle(big, u, n, exclude));
      }
    }
  }
}

TEST_CASE("checkpoints round-trip through disk") {
  RatingsDataset data = random_ratings(8, 6, 19);
  RecTrainConfig cfg;
  cfg.d = 3;
  cfg.epochs = 2;
  cfg.seed = 40;
  MFModel m = train_bpr(data, cfg);

  testutil::TempDir tmp;
  std::string path = tmp.file("model.json");
  std::map<std::string, std::string> meta{{"kind", "BPR"}, {"d", "3"}};
  save_recommender(path, m, meta, cfg.seed);

  RecommenderCheckpoint cp = load_recommender(path);
  CHECK(max_abs_diff(cp.model.user_vectors, m.user_vectors) == 0.0);
  CHECK(max_abs_diff(cp.model.item_vectors, m.item_vectors) == 0.0);
  CHECK(cp.config == meta);
  CHECK(cp.seed == 40);

  CHECK_THROWS_AS(load_recommender(tmp.file("absent.json")), DataError);
  testutil::write_file(tmp.file("junk.json"), "not json at all");
  CHECK_THROWS_AS(load_recommender(tmp.file("junk.json")), DataError);
  testutil::write_file(tmp.file("tag.json"), "{\"format\":\"other\",\"version\":1}");
  CHECK_THROWS_AS(load_recommender(tmp.file("tag.json")), DataError);
}

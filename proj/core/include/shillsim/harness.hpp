#ifndef SHILLSIM_HARNESS_HPP
#define SHILLSIM_HARNESS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shillsim/attack.hpp"
#include "shillsim/dataset.hpp"
#include "shillsim/gan.hpp"
#include "shillsim/recommender.hpp"

namespace shillsim {

// How many items an experiment promotes at once.
enum class TargetMode { kSingle, kMultiple };  // one target vs ten

std::string target_mode_name(TargetMode mode);
TargetMode target_mode_from_name(const std::string& name);
int target_mode_count(TargetMode mode);

// Everything an experiment needs.  Seeds inside the gan/rec configs are
// ignored; every cell derives its own streams from the master seed and its
// coordinates, so cells can run in any order with identical results.
struct ExperimentSpec {
  std::string dataset_path;  // informational; run_experiment takes the data
  std::vector<AttackKind> attacks{AttackKind::kGoat};
  std::vector<double> fractions{0.01, 0.02, 0.03, 0.04, 0.05};
  TargetMode target_mode = TargetMode::kSingle;
  int target_rating = 4;
  std::vector<RecommenderKind> recommenders{RecommenderKind::kBpr};
  int runs = 10;
  double train_fraction = 0.7;
  AttackThresholds thresholds;  // max_ratings 0 = derive from the train split
  GanTrainConfig gan;
  RecTrainConfig rec;
  bool with_detection = false;
  int detection_folds = 5;
  std::uint64_t seed = 0;
};

// Ranking metrics of one trained model over the real users.
struct MetricSet {
  double hit_ratio = 0.0;
  double precision = 0.0;
  double ndcg = 0.0;
  std::optional<double> hr_prime;  // needs injected profiles: post-attack only
};

struct RunMetrics {
  int run = 0;
  std::uint64_t attack_seed = 0;
  std::uint64_t rec_seed = 0;
  MetricSet baseline;  // same recommender trained on the clean split
  MetricSet attacked;
};

// One grid cell: attack kind x injection fraction x recommender.  A failed
// run leaves the error message here and the medians unset; completed runs
// stay available.
struct ExperimentCell {
  AttackKind attack = AttackKind::kGoat;
  double fraction = 0.0;
  RecommenderKind recommender = RecommenderKind::kBpr;
  int planned_runs = 0;
  std::vector<RunMetrics> runs;
  std::optional<MetricSet> median_baseline;
  std::optional<MetricSet> median_attacked;
  std::string error;
};

struct DetectionScores {
  double pca_precision = 0.0;
  double pca_recall = 0.0;
  double degree_precision = 0.0;
  double degree_recall = 0.0;
};

struct DetectionRun {
  int run = 0;
  DetectionScores scores;
};

// Detection cells are keyed by attack x fraction only: detectors look at
// the poisoned data, not at any recommender.
struct DetectionCell {
  AttackKind attack = AttackKind::kGoat;
  double fraction = 0.0;
  int planned_runs = 0;
  std::vector<DetectionRun> runs;
  std::optional<DetectionScores> median;
  std::string error;
};

// Star-value counts, index 0 = one star.
struct RatingPattern {
  std::array<std::int64_t, 5> stars{};
  std::int64_t total() const;
};

RatingPattern rating_pattern(const RatingsDataset& data);
RatingPattern profiles_pattern(const std::vector<FakeProfile>& profiles);

struct ExperimentResult {
  ExperimentSpec spec;
  int resolved_max_ratings = 0;
  std::vector<int> targets;
  std::vector<std::string> target_ids;
  std::vector<ExperimentCell> cells;
  std::vector<DetectionCell> detection;
  RatingPattern real_pattern;  // train split
  std::vector<std::pair<AttackKind, RatingPattern>> generated_patterns;
  // GAN loss history per run index; present only when a GOAT cell needed the
  // generator.
  std::vector<std::vector<GanEpochStats>> gan_histories;
};

// Full grid sweep: split once, pick targets once, then per cell and run
// build profiles, inject, retrain, rank and score.  Profiles are shared
// across recommenders within a run; baselines are shared across the whole
// grid.  Errors abort their cell and are recorded on it.
ExperimentResult run_experiment(const RatingsDataset& data,
                                const ExperimentSpec& spec);

struct BenchResult {
  double seconds = 0.0;
  std::int64_t nonzero_ratings = 0;  // profile entries above one half
  int profiles = 0;
};

// Wall-clock cost of building n_profiles fake profiles with no target items.
BenchResult bench_cost(const RatingsDataset& data, const ItemItemGraph& graph,
                       AttackKind kind, int n_profiles,
                       const AttackThresholds& thresholds,
                       const GeneratorParams* generator, std::uint64_t seed);

// Writes into out_dir: result.json, cells.csv, runs.csv, detection.csv (when
// detection ran), gan_history_run<N>.csv per trained generator, and SVG
// charts under plots/ (each metric against the injection fraction per
// recommender, plus the star-value histogram of real vs generated ratings).
void emit_outputs(const ExperimentResult& result, const std::string& out_dir);

// Just the SVG charts, for re-plotting an existing result.
void emit_plots(const ExperimentResult& result, const std::string& plot_dir);

// Reads a result.json written by emit_outputs.  GAN histories live in their
// own CSV files and are not restored.
ExperimentResult load_result(const std::string& path);

}  // namespace shillsim

#endif

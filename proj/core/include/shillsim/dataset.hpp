#ifndef SHILLSIM_DATASET_HPP
#define SHILLSIM_DATASET_HPP

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace shillsim {

struct ItemRating {
  int item;
  int rating;
  std::int64_t timestamp;  // kNoTimestamp when absent
};

// Sampling thresholds used when assembling fake profiles.
struct AttackThresholds {
  // Template users need at least this many ratings; no fake profile is
  // smaller.
  int min_ratings = 6;
  // Cap on ratings per fake profile.  0 means "derive from the data" via
  // derive_max_ratings.
  int max_ratings = 0;
  // Selected items must have at least this many raters.  Filler items use a
  // third of it, rounded up.
  int popularity_floor = 8;
  // Fraction of a profile given to selected items.
  double selected_fraction = 0.3;
};

// In-memory rating table with dense user/item indices.  Ratings are integer
// stars in [1, 5]; a (user, item) pair appears at most once.  Instances are
// treated as immutable once built, so shared const reads are safe.
class RatingsDataset {
 public:
  static constexpr std::int64_t kNoTimestamp =
      std::numeric_limits<std::int64_t>::min();

  int user_count() const { return static_cast<int>(user_ids_.size()); }
  int item_count() const { return static_cast<int>(item_ids_.size()); }
  std::int64_t rating_count() const { return rating_count_; }

  const std::string& user_id(int u) const { return user_ids_[u]; }
  const std::string& item_id(int i) const { return item_ids_[i]; }
  // Dense index for an external id, or -1 when unknown.
  int user_index(const std::string& id) const;
  int item_index(const std::string& id) const;

  int intern_user(const std::string& id);
  int intern_item(const std::string& id);

  // Throws DataError on out-of-range ratings or duplicate (user, item) pairs.
  void add_rating(int user, int item, int rating,
                  std::int64_t timestamp = kNoTimestamp);

  const std::vector<ItemRating>& user_ratings(int u) const {
    return by_user_[u];
  }
  bool is_rated(int user, int item) const;

  int per_user_count(int u) const {
    return static_cast<int>(by_user_[u].size());
  }
  int per_item_count(int i) const { return item_counts_[i]; }
  // Mean of an item's ratings; 0 for items nobody rated.
  double per_item_mean(int i) const;
  // Population variance (div by n); 0 for items with fewer than two ratings.
  double per_item_variance(int i) const;
  double global_mean() const;
  double global_variance() const;

 private:
  std::vector<std::string> user_ids_, item_ids_;
  std::unordered_map<std::string, int> user_index_, item_index_;
  std::vector<std::vector<ItemRating>> by_user_;
  std::vector<int> item_counts_;
  std::vector<double> item_sums_, item_sq_sums_;
  std::int64_t rating_count_ = 0;
  double rating_sum_ = 0.0, rating_sq_sum_ = 0.0;
};

enum class RatingsFormat { kTsv, kCsv };

// Reads `user, item, rating[, timestamp]` rows.  A header row is detected by a
// non-numeric rating field on the first line.  Errors carry path and line.
RatingsDataset load_ratings(const std::string& path, RatingsFormat format);
void save_ratings(const RatingsDataset& data, const std::string& path,
                  RatingsFormat format);

// Per-user random split.  Both children keep the parent's user and item index
// space; only the ratings are partitioned.  Every user keeps at least one
// training rating, so single-rating users contribute nothing to the test set.
struct SplitDataset {
  RatingsDataset train;
  RatingsDataset test;
  double train_fraction;
};
SplitDataset split(const RatingsDataset& data, double train_fraction,
                   std::uint64_t seed);

// Smallest x such that at least half of all users have x or fewer ratings.
int derive_max_ratings(const RatingsDataset& data);

// hist[c] = number of users (items) with exactly c ratings.
struct RatingHistograms {
  std::map<int, std::int64_t> per_user;
  std::map<int, std::int64_t> per_item;
};
RatingHistograms rating_histograms(const RatingsDataset& data);

}  // namespace shillsim

#endif

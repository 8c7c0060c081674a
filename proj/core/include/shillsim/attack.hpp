#ifndef SHILLSIM_ATTACK_HPP
#define SHILLSIM_ATTACK_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "shillsim/dataset.hpp"
#include "shillsim/gan.hpp"
#include "shillsim/itemgraph.hpp"
#include "shillsim/rng.hpp"

namespace shillsim {

enum class AttackKind { kGoat, kAve, kRan, kBand, kUm };

std::string attack_kind_name(AttackKind kind);
AttackKind attack_kind_from_name(const std::string& name);

std::string part_name(ProfilePart part);
ProfilePart part_from_name(const std::string& name);

struct AttackConfig {
  AttackKind kind = AttackKind::kGoat;
  double injection_fraction = 0.05;  // in (0, 0.2]
  std::vector<int> targets;          // dense item indices, promoted items
  int target_rating = 4;
  AttackThresholds thresholds;  // max_ratings must be resolved (> 0)
  std::uint64_t seed = 0;
};

// One injected user.  Items absent from `entries` are unrated.  `scheme` is
// the constituent actually used (differs from the configured kind only for
// UM profiles); it is a build-time annotation and is not persisted.
struct FakeProfile {
  std::string profile_id;
  std::map<int, int> entries;          // item -> star rating in [1, 5]
  std::map<int, ProfilePart> part_of;  // item -> profile part
  AttackKind scheme = AttackKind::kGoat;
};

// Uniform draw of n distinct promotion targets among items whose mean rating
// sits below two stars; returned ascending.  Throws DataError naming the
// pool size when fewer than n items qualify.
std::vector<int> select_targets(const RatingsDataset& data, int n, Rng& rng);

// Clip to [1, 5], then round to the nearest star with half-values going up.
int clip_round_rating(double value);

// Turns the item skeleton plus one rating value per sampled slot (selected
// part first, then filler) into a profile: values are clipped and rounded,
// target items appended at the configured target rating.  The target set may
// be empty (cost benchmarks rate no targets); sampled items overlapping the
// targets are a DataError.
FakeProfile assemble_profile(const std::string& profile_id,
                             const SampledProfileItems& sampled,
                             const Eigen::VectorXd& ratings,
                             const AttackConfig& config);

// Handcrafted rating schemes, one value per sampled slot.  Ave draws from
// each item's own mean/variance, Ran from the global ones, Band rates the
// selected part five stars and fills like Ave (only filler slots consume
// draws), UM first draws one of the three uniformly.  Degenerate variance
// collapses the draw to the mean.  Every value is already clipped + rounded.
Eigen::VectorXd baseline_ratings(AttackKind kind,
                                 const SampledProfileItems& sampled,
                                 const RatingsDataset& data, Rng& rng);

// Band's selected part: the most popular selected-eligible items (popularity
// descending, index ascending on ties), skipping the skeleton's filler items
// and the given exclusions so parts stay disjoint.  Filler is untouched.
SampledProfileItems band_selected_replacement(
    const SampledProfileItems& sampled, const ItemItemGraph& graph,
    const AttackThresholds& thresholds, const std::vector<int>& excluded);

// Full attack construction: ceil(injection_fraction * #users) profiles named
// fake_0000, fake_0001, ... each with its own derived random stream.
// Skeletons colliding with the target set are redrawn.  GOAT needs the
// trained generator; the other kinds ignore it.
std::vector<FakeProfile> build_profiles(const RatingsDataset& data,
                                        const ItemItemGraph& graph,
                                        const AttackConfig& config,
                                        const GeneratorParams* generator);

// Fixed-count variant with no target items, for cost measurements: the same
// per-profile pipeline, so a profile here is bitwise identical to its
// build_profiles counterpart minus the target entries.
std::vector<FakeProfile> build_profile_batch(const RatingsDataset& data,
                                             const ItemItemGraph& graph,
                                             AttackKind kind, int count,
                                             const AttackThresholds& thresholds,
                                             const GeneratorParams* generator,
                                             std::uint64_t seed);

struct InjectionResult {
  RatingsDataset poisoned;
  std::vector<std::string> fake_user_ids;  // ground truth for detectors
};

// Merges the profiles into a copy of the dataset under fresh user ids.
InjectionResult inject(const RatingsDataset& data,
                       const std::vector<FakeProfile>& profiles);

// Ratings in the dataset TSV format (profile id, external item id, rating)
// plus a part sidecar `profile_id<TAB>item_id<TAB>part`.
void save_profiles(const std::string& ratings_path,
                   const std::string& parts_path,
                   const std::vector<FakeProfile>& profiles,
                   const RatingsDataset& data);
std::vector<FakeProfile> load_profiles(const std::string& ratings_path,
                                       const std::string& parts_path,
                                       const RatingsDataset& data);

}  // namespace shillsim

#endif

#ifndef SHILLSIM_SYNTHETIC_HPP
#define SHILLSIM_SYNTHETIC_HPP

#include <cstdint>

#include "shillsim/dataset.hpp"

namespace shillsim {

// Desk-scale rating generator with the structure the pipeline cares about:
// skewed item popularity, low-rank user/item preference, and a block of
// deliberately unloved items to serve as attack targets.
struct SyntheticConfig {
  int users = 180;
  int items = 120;  // total catalog, planted targets included
  // Items at the end of the catalog kept out of organic sampling; each is
  // rated one star by three users, so their mean sits below two.
  int planted_targets = 10;
  int min_ratings = 8;   // organic ratings per user, inclusive bounds
  int max_ratings = 25;
  std::uint64_t seed = 0;
};

RatingsDataset make_synthetic(const SyntheticConfig& config);

}  // namespace shillsim

#endif

#include "shillsim/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <vector>

#include "shillsim/attack.hpp"
#include "shillsim/errors.hpp"
#include "shillsim/rng.hpp"

namespace shillsim {

RatingsDataset make_synthetic(const SyntheticConfig& config) {
  if (config.users < 1 || config.items < 1) {
    throw UsageError("synthetic data needs users and items");
  }
  if (config.planted_targets < 0 || config.planted_targets >= config.items) {
    throw UsageError("planted targets must leave organic items in the catalog");
  }
  const int organic = config.items - config.planted_targets;
  if (config.min_ratings < 1 || config.min_ratings > config.max_ratings ||
      config.max_ratings > organic) {
    throw UsageError("per-user rating bounds exceed the organic catalog");
  }
  if (config.planted_targets > 0 && config.users < 3) {
    throw UsageError("planting targets takes at least three users");
  }

  RatingsDataset data;
  char buf[16];
  for (int u = 0; u < config.users; ++u) {
    std::snprintf(buf, sizeof(buf), "u%04d", u);
    data.intern_user(buf);
  }
  for (int i = 0; i < config.items; ++i) {
    std::snprintf(buf, sizeof(buf), "m%04d", i);
    data.intern_item(buf);
  }

  Rng rng(derive_seed(config.seed, "synthetic"));

  // Item latents: a popularity skew that produces a heavy head, a quality
  // offset, and two taste factors.
  std::vector<double> weight(organic), quality(organic);
  std::vector<std::array<double, 2>> item_taste(organic);
  for (int i = 0; i < organic; ++i) {
    weight[i] = std::exp(1.2 * rng.normal());
    quality[i] = 0.9 * rng.normal();
    item_taste[i] = {rng.normal(), rng.normal()};
  }

  std::vector<double> bias(config.users);
  std::vector<std::array<double, 2>> user_taste(config.users);
  for (int u = 0; u < config.users; ++u) {
    bias[u] = 0.5 * rng.normal();
    user_taste[u] = {rng.normal(), rng.normal()};
  }

  std::vector<char> taken(organic);
  for (int u = 0; u < config.users; ++u) {
    int span = config.max_ratings - config.min_ratings + 1;
    int count = config.min_ratings + static_cast<int>(rng.below(span));
    std::fill(taken.begin(), taken.end(), 0);
    double remaining = 0.0;
    for (int i = 0; i < organic; ++i) remaining += weight[i];
    for (int pick = 0; pick < count; ++pick) {
      double x = rng.uniform() * remaining;
      int chosen = -1;
      for (int i = 0; i < organic; ++i) {
        if (taken[i]) continue;
        x -= weight[i];
        if (x <= 0.0) {
          chosen = i;
          break;
        }
      }
      if (chosen < 0) {  // guard against accumulated rounding
        for (int i = organic - 1; i >= 0; --i) {
          if (!taken[i]) {
            chosen = i;
            break;
          }
        }
      }
      taken[chosen] = 1;
      remaining -= weight[chosen];
      double taste = user_taste[u][0] * item_taste[chosen][0] +
                     user_taste[u][1] * item_taste[chosen][1];
      double v = 3.2 + quality[chosen] + bias[u] + 0.6 * taste +
                 0.7 * rng.normal();
      data.add_rating(u, chosen, clip_round_rating(v));
    }
  }

  std::vector<int> everyone(config.users);
  for (int u = 0; u < config.users; ++u) everyone[u] = u;
  for (int t = 0; t < config.planted_targets; ++t) {
    for (int u : rng.sample(everyone, 3)) {
      data.add_rating(u, organic + t, 1);
    }
  }
  return data;
}

}  // namespace shillsim

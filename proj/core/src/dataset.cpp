#include "shillsim/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "shillsim/errors.hpp"
#include "shillsim/rng.hpp"

namespace shillsim {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void fail_line(const std::string& path, std::size_t line,
                            const std::string& what) {
  throw DataError(path + ": line " + std::to_string(line) + ": " + what);
}

}  // namespace

int RatingsDataset::user_index(const std::string& id) const {
  auto it = user_index_.find(id);
  return it == user_index_.end() ? -1 : it->second;
}

int RatingsDataset::item_index(const std::string& id) const {
  auto it = item_index_.find(id);
  return it == item_index_.end() ? -1 : it->second;
}

int RatingsDataset::intern_user(const std::string& id) {
  auto it = user_index_.find(id);
  if (it != user_index_.end()) return it->second;
  int idx = user_count();
  user_index_.emplace(id, idx);
  user_ids_.push_back(id);
  by_user_.emplace_back();
  return idx;
}

int RatingsDataset::intern_item(const std::string& id) {
  auto it = item_index_.find(id);
  if (it != item_index_.end()) return it->second;
  int idx = item_count();
  item_index_.emplace(id, idx);
  item_ids_.push_back(id);
  item_counts_.push_back(0);
  item_sums_.push_back(0.0);
  item_sq_sums_.push_back(0.0);
  return idx;
}

void RatingsDataset::add_rating(int user, int item, int rating,
                                std::int64_t timestamp) {
  if (rating < 1 || rating > 5) {
    throw DataError("rating out of range [1,5]: " + std::to_string(rating));
  }
  auto& row = by_user_[user];
  auto pos = std::lower_bound(
      row.begin(), row.end(), item,
      [](const ItemRating& a, int b) { return a.item < b; });
  if (pos != row.end() && pos->item == item) {
    throw DataError("duplicate rating for user '" + user_ids_[user] +
                    "' item '" + item_ids_[item] + "'");
  }
  row.insert(pos, ItemRating{item, rating, timestamp});
  item_counts_[item] += 1;
  item_sums_[item] += rating;
  item_sq_sums_[item] += double(rating) * rating;
  rating_count_ += 1;
  rating_sum_ += rating;
  rating_sq_sum_ += double(rating) * rating;
}

bool RatingsDataset::is_rated(int user, int item) const {
  const auto& row = by_user_[user];
  auto pos = std::lower_bound(
      row.begin(), row.end(), item,
      [](const ItemRating& a, int b) { return a.item < b; });
  return pos != row.end() && pos->item == item;
}

double RatingsDataset::per_item_mean(int i) const {
  return item_counts_[i] == 0 ? 0.0 : item_sums_[i] / item_counts_[i];
}

double RatingsDataset::per_item_variance(int i) const {
  int n = item_counts_[i];
  if (n < 2) return 0.0;
  double mean = item_sums_[i] / n;
  return std::max(0.0, item_sq_sums_[i] / n - mean * mean);
}

double RatingsDataset::global_mean() const {
  return rating_count_ == 0 ? 0.0 : rating_sum_ / double(rating_count_);
}

double RatingsDataset::global_variance() const {
  if (rating_count_ < 2) return 0.0;
  double mean = global_mean();
  return std::max(0.0, rating_sq_sum_ / double(rating_count_) - mean * mean);
}

RatingsDataset load_ratings(const std::string& path, RatingsFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open ratings file: " + path);
  const char sep = format == RatingsFormat::kTsv ? '\t' : ',';

  RatingsDataset data;
  std::string line;
  std::size_t lineno = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    auto fields = split_fields(view, sep);
    if (fields.size() < 3 || fields.size() > 4) {
      fail_line(path, lineno, "expected 3 or 4 fields, got " +
                                  std::to_string(fields.size()));
    }
    std::int64_t rating = 0;
    if (!parse_int(fields[2], rating)) {
      if (first_content_line) {
        // A non-numeric rating on the first row marks a header.
        first_content_line = false;
        continue;
      }
      fail_line(path, lineno,
                "rating is not an integer: '" + std::string(trim(fields[2])) +
                    "'");
    }
    first_content_line = false;
    if (rating < 1 || rating > 5) {
      fail_line(path, lineno, "rating out of range [1,5]: " +
                                  std::to_string(rating));
    }
    std::string user(trim(fields[0]));
    std::string item(trim(fields[1]));
    if (user.empty() || item.empty()) {
      fail_line(path, lineno, "empty user or item id");
    }
    std::int64_t ts = RatingsDataset::kNoTimestamp;
    if (fields.size() == 4 && !parse_int(fields[3], ts)) {
      fail_line(path, lineno,
                "timestamp is not an integer: '" +
                    std::string(trim(fields[3])) + "'");
    }
    try {
      data.add_rating(data.intern_user(user), data.intern_item(item),
                      static_cast<int>(rating), ts);
    } catch (const DataError& e) {
      fail_line(path, lineno, e.what());
    }
  }
  return data;
}

void save_ratings(const RatingsDataset& data, const std::string& path,
                  RatingsFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write ratings file: " + path);
  const char sep = format == RatingsFormat::kTsv ? '\t' : ',';
  for (int u = 0; u < data.user_count(); ++u) {
    for (const auto& ir : data.user_ratings(u)) {
      out << data.user_id(u) << sep << data.item_id(ir.item) << sep
          << ir.rating;
      if (ir.timestamp != RatingsDataset::kNoTimestamp) {
        out << sep << ir.timestamp;
      }
      out << '\n';
    }
  }
  if (!out) throw DataError("short write to ratings file: " + path);
}

SplitDataset split(const RatingsDataset& data, double train_fraction,
                   std::uint64_t seed) {
  if (!(train_fraction > 0.0) || train_fraction > 1.0) {
    throw UsageError("train fraction must lie in (0, 1], got " +
                     std::to_string(train_fraction));
  }
  SplitDataset out;
  out.train_fraction = train_fraction;
  // Children share the parent's dense index space so that downstream code can
  // address train and test rows interchangeably.
  for (int u = 0; u < data.user_count(); ++u) {
    out.train.intern_user(data.user_id(u));
    out.test.intern_user(data.user_id(u));
  }
  for (int i = 0; i < data.item_count(); ++i) {
    out.train.intern_item(data.item_id(i));
    out.test.intern_item(data.item_id(i));
  }

  Rng rng(derive_seed(seed, "split"));
  for (int u = 0; u < data.user_count(); ++u) {
    const auto& row = data.user_ratings(u);
    int n = static_cast<int>(row.size());
    if (n == 0) continue;
    int n_train;
    if (train_fraction >= 1.0) {
      n_train = n;
    } else {
      // Round half up, but give every user at least one training rating.
      n_train = static_cast<int>(std::floor(n * train_fraction + 0.5));
      n_train = std::clamp(n_train, 1, n);
    }
    std::vector<int> pos(n);
    for (int j = 0; j < n; ++j) pos[j] = j;
    auto picked = rng.sample(pos, static_cast<std::size_t>(n_train));
    std::vector<char> in_train(n, 0);
    for (int p : picked) in_train[p] = 1;
    for (int j = 0; j < n; ++j) {
      auto& side = in_train[j] ? out.train : out.test;
      side.add_rating(u, row[j].item, row[j].rating, row[j].timestamp);
    }
  }
  return out;
}

int derive_max_ratings(const RatingsDataset& data) {
  if (data.user_count() == 0) {
    throw DataError("cannot derive a rating cap from an empty dataset");
  }
  std::vector<int> counts(data.user_count());
  for (int u = 0; u < data.user_count(); ++u) counts[u] = data.per_user_count(u);
  std::sort(counts.begin(), counts.end());
  // Lower median: the smallest count covering at least half of all users.
  return counts[(counts.size() - 1) / 2];
}

RatingHistograms rating_histograms(const RatingsDataset& data) {
  RatingHistograms h;
  for (int u = 0; u < data.user_count(); ++u) {
    h.per_user[data.per_user_count(u)] += 1;
  }
  for (int i = 0; i < data.item_count(); ++i) {
    h.per_item[data.per_item_count(i)] += 1;
  }
  return h;
}

}  // namespace shillsim

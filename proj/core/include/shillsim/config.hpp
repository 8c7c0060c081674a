#ifndef SHILLSIM_CONFIG_HPP
#define SHILLSIM_CONFIG_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

namespace shillsim {

// Flat `key = value` configuration.  Keys are namespaced by module with a dot
// (gan.epochs, attack.fraction, ...).  Lines starting with '#' and blank
// lines are skipped.  Duplicate keys are rejected to catch editing mistakes.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  // Required lookups throw UsageError when the key is missing; the defaulted
  // forms fall back instead.
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& def) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long def) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& def) const;
  std::vector<std::string> get_string_list(
      const std::string& key, const std::vector<std::string>& def) const;

  // Rejects keys outside the known set; typos in experiment configs should
  // fail loudly rather than silently fall back to defaults.
  void require_known(const std::set<std::string>& known) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace shillsim

#endif

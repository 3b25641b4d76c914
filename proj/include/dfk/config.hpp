#pragma once

// Flat dotted-key configuration text.  Each non-blank line reads
// `section.key = value`; everything from the first `#` on a line is a
// comment.  Keys may use letters, digits, underscores, and dots.  Typed
// getters record which keys were consumed so that finish() can reject
// configurations containing unknown keys.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace dfk {

class ConfigMap {
 public:
  static ConfigMap parse(std::istream& is, const std::string& origin);
  static ConfigMap from_file(const std::string& path);

  bool has(const std::string& key) const;

  // Single-argument getters throw ConfigError when the key is absent; the
  // two-argument forms return the fallback instead.  All record consumption.
  std::string get_string(const std::string& key);
  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key);
  double get_double(const std::string& key, double fallback);
  std::size_t get_size(const std::string& key);
  std::size_t get_size(const std::string& key, std::size_t fallback);
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& fallback);

  // Throws ConfigError naming every stored key no getter ever consumed.
  void finish() const;

  // Raw entries in file order-independent (sorted) form, for provenance.
  const std::map<std::string, std::string>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, std::string> entries_;
  std::set<std::string> consumed_;
  std::string origin_;

  const std::string* find(const std::string& key);
};

}  // namespace dfk

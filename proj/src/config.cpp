#include "dfk/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dfk/errors.hpp"

namespace dfk {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  for (char c : k) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
                    c == '.';
    if (!ok) return false;
  }
  return true;
}

double parse_double(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || text.empty() || errno == ERANGE) {
    throw ConfigError("config key '" + key + "': '" + text +
                      "' is not a number");
  }
  return v;
}

}  // namespace

ConfigMap ConfigMap::parse(std::istream& is, const std::string& origin) {
  ConfigMap map;
  map.origin_ = origin;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (!valid_key(key)) {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": malformed key '" + key + "'");
    }
    if (value.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": key '" +
                        key + "' has an empty value");
    }
    if (!map.entries_.emplace(key, value).second) {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": duplicate key '" + key + "'");
    }
  }
  return map;
}

ConfigMap ConfigMap::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file '" + path + "'");
  return parse(is, path);
}

bool ConfigMap::has(const std::string& key) const {
  return entries_.count(key) != 0;
}

const std::string* ConfigMap::find(const std::string& key) {
  auto it = entries_.find(key);
  if (it == entries_.end()) return nullptr;
  consumed_.insert(key);
  return &it->second;
}

std::string ConfigMap::get_string(const std::string& key) {
  const std::string* v = find(key);
  if (!v) throw ConfigError(origin_ + ": missing required key '" + key + "'");
  return *v;
}

std::string ConfigMap::get_string(const std::string& key,
                                  const std::string& fallback) {
  const std::string* v = find(key);
  return v ? *v : fallback;
}

double ConfigMap::get_double(const std::string& key) {
  return parse_double(key, get_string(key));
}

double ConfigMap::get_double(const std::string& key, double fallback) {
  const std::string* v = find(key);
  return v ? parse_double(key, *v) : fallback;
}

std::size_t ConfigMap::get_size(const std::string& key) {
  const double v = get_double(key);
  if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
    throw ConfigError("config key '" + key + "' must be a nonnegative integer");
  }
  return static_cast<std::size_t>(v);
}

std::size_t ConfigMap::get_size(const std::string& key, std::size_t fallback) {
  if (!has(key)) return fallback;
  return get_size(key);
}

std::uint64_t ConfigMap::get_seed(const std::string& key,
                                  std::uint64_t fallback) {
  const std::string* v = find(key);
  if (!v) return fallback;
  errno = 0;
  char* end = nullptr;
  const unsigned long long parsed = std::strtoull(v->c_str(), &end, 10);
  if (end != v->c_str() + v->size() || v->empty() || errno == ERANGE ||
      v->front() == '-') {
    throw ConfigError("config key '" + key + "': '" + *v +
                      "' is not an unsigned integer");
  }
  return static_cast<std::uint64_t>(parsed);
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) {
  const std::string* v = find(key);
  if (!v) return fallback;
  if (*v == "true") return true;
  if (*v == "false") return false;
  throw ConfigError("config key '" + key + "' must be 'true' or 'false'");
}

std::vector<double> ConfigMap::get_doubles(const std::string& key,
                                           const std::vector<double>& fallback) {
  const std::string* v = find(key);
  if (!v) return fallback;
  std::vector<double> out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) {
      throw ConfigError("config key '" + key + "': empty list element");
    }
    out.push_back(parse_double(key, t));
  }
  if (out.empty()) {
    throw ConfigError("config key '" + key + "': empty list");
  }
  return out;
}

void ConfigMap::finish() const {
  std::string unknown;
  for (const auto& [key, value] : entries_) {
    (void)value;
    if (!consumed_.count(key)) {
      if (!unknown.empty()) unknown += ", ";
      unknown += key;
    }
  }
  if (!unknown.empty()) {
    throw ConfigError(origin_ + ": unknown configuration keys: " + unknown);
  }
}

}  // namespace dfk

#pragma once
// Experiment configuration: a flat key-value text file with [section]
// headers, checked against a fixed schema with per-field defaults. Every
// effective setting can be overridden by an environment variable named
// SCENGEN_<SECTION>_<KEY> (upper case, e.g. SCENGEN_RUN_SEED), and command
// line flags override both. The hash of the effective settings is stamped
// onto every artifact a command writes.

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace scengen::config {

struct Config {
  // effective "section.key" -> value, every schema key present
  std::map<std::string, std::string> values;
  std::string hash;  // 16 hex digits over the sorted effective settings

  const std::string& str(const std::string& key) const;
  long integer(const std::string& key) const;
  double number(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<int> int_list(const std::string& key) const;          // "a,b,c"
  std::vector<std::string> str_list(const std::string& key) const;  // empty -> {}
};

// ordered (key, value) pairs applied after file and environment
using Overrides = std::vector<std::pair<std::string, std::string>>;

// Parse configuration text. Unknown sections or keys, malformed numbers and
// out-of-range values throw std::invalid_argument naming the field.
Config parse(const std::string& text, const Overrides& overrides = {});

// parse() on a file's contents; empty path loads pure defaults
Config load(const std::string& path, const Overrides& overrides = {});

// every schema key with its default, for documentation output
std::vector<std::pair<std::string, std::string>> schema_defaults();

}  // namespace scengen::config

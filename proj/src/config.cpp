#include "scengen/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scengen::config {
namespace {

struct Field {
  const char* key;
  const char* def;
  const char* choices;  // nullptr or "a|b|c"
};

// the schema: every recognized key with its default
const Field kSchema[] = {
    {"run.track", "load", "wind|pv|load"},
    {"run.model", "nf", "nf|vae|gan|rand"},
    {"run.seed", "1", nullptr},
    {"run.out", "out", nullptr},
    {"run.solver", "relaxed", "relaxed|exact"},

    {"data.wind", "", nullptr},
    {"data.pv", "", nullptr},
    {"data.load", "", nullptr},
    {"data.prices", "data/day_ahead_prices.csv", nullptr},
    {"data.vs_dates", "50", nullptr},
    {"data.ts_dates", "50", nullptr},
    {"data.split_seed", "1", nullptr},

    {"scenarios.count", "100", nullptr},
    {"scenarios.split", "ts", "ls|vs|ts"},

    {"nf.epochs", "300", nullptr},
    {"nf.lr", "1e-4", nullptr},
    {"nf.weight_decay", "5e-4", nullptr},
    {"nf.batch_fraction", "0.1", nullptr},
    {"nf.embedding_size", "40", nullptr},
    {"nf.conditioner_hidden", "300,300,300,300", nullptr},
    {"nf.integrand_hidden", "40,40,40", nullptr},
    {"nf.offset_hidden", "40", nullptr},
    {"nf.quad_order", "32", nullptr},
    {"nf.affine", "false", nullptr},
    {"nf.affine_steps", "5", nullptr},

    {"vae.epochs", "300", nullptr},
    {"vae.lr", "1e-3", nullptr},
    {"vae.weight_decay", "1e-4", nullptr},
    {"vae.batch_fraction", "0.1", nullptr},
    {"vae.latent_dim", "5", nullptr},
    {"vae.encoder_hidden", "500", nullptr},
    {"vae.decoder_hidden", "500", nullptr},
    {"vae.decoder_noise", "false", nullptr},

    {"gan.epochs", "300", nullptr},
    {"gan.lr", "2e-4", nullptr},
    {"gan.weight_decay", "1e-4", nullptr},
    {"gan.batch_fraction", "0.1", nullptr},
    {"gan.latent_dim", "64", nullptr},
    {"gan.generator_hidden", "256,256", nullptr},
    {"gan.critic_hidden", "256,256", nullptr},
    {"gan.lambda_gp", "10", nullptr},
    {"gan.critic_steps", "5", nullptr},
    {"gan.checkpoint_every", "10", nullptr},
    {"gan.es_scenarios", "100", nullptr},

    {"quality.models", "nf,vae,gan,rand", nullptr},
    {"quality.c2st", "true", nullptr},
    {"quality.c2st_trees", "1000", nullptr},
    {"quality.fan_day", "0", nullptr},

    {"value.models", "nf,vae,gan", nullptr},
    {"value.scenario_count", "50", nullptr},
    {"value.days", "0", nullptr},
    {"value.pv_zones", "", nullptr},
    {"value.wind_zones", "", nullptr},
    {"value.load_zone", "1", nullptr},
    {"value.threads", "0", nullptr},
};

const Field* find_field(const std::string& key) {
  for (const Field& f : kSchema)
    if (key == f.key) return &f;
  return nullptr;
}

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  const std::size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

std::string env_name(const std::string& key) {
  std::string out = "SCENGEN_";
  for (char c : key) out += c == '.' ? '_' : static_cast<char>(std::toupper(c));
  return out;
}

void check_choices(const std::string& key, const std::string& value, const char* choices) {
  if (!choices) return;
  std::stringstream ss(choices);
  std::string item;
  while (std::getline(ss, item, '|'))
    if (value == item) return;
  throw std::invalid_argument("config: " + key + " must be one of {" + choices + "}, got '" +
                              value + "'");
}

// numeric sanity for the handful of fields where a bad value would fail far
// from the config layer
void check_ranges(const Config& c) {
  if (c.integer("scenarios.count") < 1)
    throw std::invalid_argument("config: scenarios.count must be at least 1");
  if (c.integer("value.scenario_count") < 1)
    throw std::invalid_argument("config: value.scenario_count must be at least 1");
  for (const char* key : {"nf.epochs", "vae.epochs", "gan.epochs"})
    if (c.integer(key) < 1)
      throw std::invalid_argument(std::string("config: ") + key + " must be at least 1");
  for (const char* key : {"nf.lr", "vae.lr", "gan.lr"})
    if (!(c.number(key) > 0.0))
      throw std::invalid_argument(std::string("config: ") + key + " must be positive");
}

std::uint64_t fnv64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

const std::string& Config::str(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end()) throw std::invalid_argument("config: unknown key " + key);
  return it->second;
}

long Config::integer(const std::string& key) const {
  const std::string& v = str(key);
  char* end = nullptr;
  const long out = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size())
    throw std::invalid_argument("config: " + key + " must be an integer, got '" + v + "'");
  return out;
}

double Config::number(const std::string& key) const {
  const std::string& v = str(key);
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size())
    throw std::invalid_argument("config: " + key + " must be a number, got '" + v + "'");
  return out;
}

bool Config::flag(const std::string& key) const {
  const std::string& v = str(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: " + key + " must be true or false, got '" + v + "'");
}

std::vector<int> Config::int_list(const std::string& key) const {
  std::vector<int> out;
  for (const std::string& item : str_list(key)) {
    char* end = nullptr;
    const long v = std::strtol(item.c_str(), &end, 10);
    if (item.empty() || end != item.c_str() + item.size())
      throw std::invalid_argument("config: " + key + " must be a comma-separated integer list");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<std::string> Config::str_list(const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(str(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Config parse(const std::string& text, const Overrides& overrides) {
  Config c;
  for (const Field& f : kSchema) c.values[f.key] = f.def;

  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = section + "." + trim(line.substr(0, eq));
    if (!find_field(key))
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown field " +
                                  key);
    c.values[key] = trim(line.substr(eq + 1));
  }

  for (const Field& f : kSchema)
    if (const char* env = std::getenv(env_name(f.key).c_str())) c.values[f.key] = env;

  for (const auto& [key, value] : overrides) {
    if (!find_field(key)) throw std::invalid_argument("config: unknown field " + key);
    c.values[key] = value;
  }

  for (const Field& f : kSchema) check_choices(f.key, c.values[f.key], f.choices);
  check_ranges(c);

  std::string canon;
  for (const auto& [key, value] : c.values) canon += key + "=" + value + "\n";
  std::ostringstream hex;
  hex << std::hex;
  hex.width(16);
  hex.fill('0');
  hex << fnv64(canon);
  c.hash = hex.str();
  return c;
}

Config load(const std::string& path, const Overrides& overrides) {
  if (path.empty()) return parse("", overrides);
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), overrides);
}

std::vector<std::pair<std::string, std::string>> schema_defaults() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Field& f : kSchema) out.emplace_back(f.key, f.def);
  return out;
}

}  // namespace scengen::config

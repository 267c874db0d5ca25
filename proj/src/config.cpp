#include "gdmc/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace gdmc {

namespace {

std::string trim(const std::string &s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string &text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (auto t = trim(item); !t.empty())
      out.push_back(t);
  return out;
}

double parse_number(const std::string &text) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw std::invalid_argument("not a number: '" + text + "'");
  return value;
}

long long parse_integer(const std::string &text) {
  const std::string t = trim(text);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw std::invalid_argument("not an integer: '" + text + "'");
  return value;
}

bool parse_bool(const std::string &text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes")
    return true;
  if (t == "false" || t == "0" || t == "no")
    return false;
  throw std::invalid_argument("not a boolean: '" + text + "'");
}

const std::set<std::string> &known_keys() {
  static const std::set<std::string> keys{
      "n",    "eigenvalues", "p",      "sigma",          "beta0",
      "eta",  "T",           "trials", "seed",           "loo",
      "record_every",        "init",   "spectral",       "measure_offset",
      "out",  "jobs"};
  return keys;
}

std::string default_out_dir() {
  if (const char *env = std::getenv("GDMC_OUT_DIR"); env != nullptr && *env)
    return env;
  return "out";
}

} // namespace

ConfigMap ConfigMap::parse(const std::string &text) {
  ConfigMap map;
  std::stringstream ss(text);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(number) +
                                  ": expected key = value");
    map.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return map;
}

ConfigMap ConfigMap::load(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

void ConfigMap::set(const std::string &key, const std::string &value) {
  if (!known_keys().count(key))
    throw std::invalid_argument("unknown config key: " + key);
  values_[key] = value;
}

void ConfigMap::set_assignment(const std::string &assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("override must look like key=value: " +
                                assignment);
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void ConfigMap::merge(const ConfigMap &other) {
  for (const auto &[k, v] : other.values_)
    values_[k] = v;
}

const std::string &ConfigMap::get(const std::string &key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw std::invalid_argument("missing config key: " + key);
  return it->second;
}

double parse_scalar(const std::string &text, Index n) {
  const std::string t = trim(text);
  const auto slash = t.find('/');
  if (slash != std::string::npos && trim(t.substr(slash + 1)) == "n")
    return parse_number(t.substr(0, slash)) / static_cast<double>(n);
  const auto star = t.find('*');
  if (star != std::string::npos && trim(t.substr(star + 1)) == "n")
    return parse_number(t.substr(0, star)) * static_cast<double>(n);
  return parse_number(t);
}

std::string fnv1a_hex(const std::string &text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ConfigMap command_defaults(const std::string &command) {
  ConfigMap m;
  m.set("eta", "0.1");
  m.set("eigenvalues", "1");
  m.set("trials", "1");
  m.set("seed", "1");
  m.set("loo", "default");
  m.set("record_every", "10");
  m.set("spectral", "true");
  m.set("init", "random");
  m.set("measure_offset", "100");
  m.set("jobs", "1");
  m.set("out", default_out_dir());
  if (command == "fig1") {
    m.set("n", "1000");
    m.set("p", "1");
    m.set("sigma", "0");
    m.set("beta0", "1/n");
    m.set("T", "400");
    m.set("init", "paper");
    m.set("loo", "none");
    m.set("spectral", "false");
  } else if (command == "fig2") {
    m.set("n", "2000");
    m.set("p", "0.1");
    m.set("sigma", "0.1/n");
    m.set("beta0", "1/n");
    m.set("T", "auto");
  } else if (command == "fig3") {
    m.set("n", "500");
    m.set("p", "0.01,0.02,0.03,0.04");
    m.set("sigma", "0.1/n");
    m.set("beta0", "1e0,1e-1,1e-2,1e-3,1e-4,1e-5,1e-6,1e-7,1e-8,1e-9");
    m.set("trials", "50");
    m.set("T", "auto");
    m.set("loo", "none");
    m.set("spectral", "false");
    m.set("record_every", "1000000");
  } else if (command == "fig4") {
    m.set("n", "1000");
    m.set("eigenvalues", "1,0.75,0.5");
    m.set("p", "0.1");
    m.set("sigma", "0.1/n");
    m.set("beta0", "1/n");
    m.set("T", "600");
    m.set("loo", "none");
    m.set("spectral", "false");
  } else if (command == "run") {
    m.set("n", "1000");
    m.set("p", "0.1");
    m.set("sigma", "0");
    m.set("beta0", "1/n");
    m.set("T", "auto");
  } else {
    throw std::invalid_argument("unknown command: " + command);
  }
  return m;
}

ExperimentConfig resolve_config(const std::string &command,
                                const ConfigMap &merged) {
  ExperimentConfig cfg;
  cfg.command = command;
  const long long n = parse_integer(merged.get("n"));
  require(n >= 1, "n must be positive");
  cfg.n = static_cast<Index>(n);

  cfg.eigenvalues.clear();
  for (const auto &item : split_list(merged.get("eigenvalues")))
    cfg.eigenvalues.push_back(parse_scalar(item, cfg.n));
  require(!cfg.eigenvalues.empty(), "eigenvalues must be non-empty");
  for (std::size_t k = 0; k < cfg.eigenvalues.size(); ++k) {
    require(cfg.eigenvalues[k] > 0.0, "eigenvalues must be positive");
    if (k > 0)
      require(cfg.eigenvalues[k] <= cfg.eigenvalues[k - 1],
              "eigenvalues must be non-increasing");
  }
  require(cfg.rank() <= cfg.n, "rank exceeds n");

  cfg.p.clear();
  for (const auto &item : split_list(merged.get("p")))
    cfg.p.push_back(parse_scalar(item, cfg.n));
  require(!cfg.p.empty(), "p must be non-empty");
  for (double p : cfg.p)
    require(p > 0.0 && p <= 1.0, "p must lie in (0, 1]");

  cfg.sigma = parse_scalar(merged.get("sigma"), cfg.n);
  require(cfg.sigma >= 0.0, "sigma must be non-negative");

  cfg.beta0.clear();
  for (const auto &item : split_list(merged.get("beta0")))
    cfg.beta0.push_back(parse_scalar(item, cfg.n));
  require(!cfg.beta0.empty(), "beta0 must be non-empty");
  for (double b : cfg.beta0)
    require(b > 0.0, "beta0 must be positive");

  cfg.eta = parse_scalar(merged.get("eta"), cfg.n);
  require(cfg.eta > 0.0, "eta must be positive");

  const std::string T = trim(merged.get("T"));
  if (T == "auto") {
    require(cfg.rank() == 1, "T = auto requires a rank-1 model");
  } else {
    const long long t = parse_integer(T);
    require(t >= 1, "T must be at least 1");
    cfg.T = static_cast<Index>(t);
  }

  const long long trials = parse_integer(merged.get("trials"));
  require(trials >= 1, "trials must be at least 1");
  cfg.trials = static_cast<Index>(trials);
  cfg.seed = static_cast<Seed>(std::stoull(trim(merged.get("seed"))));
  cfg.loo = trim(merged.get("loo"));
  const long long stride = parse_integer(merged.get("record_every"));
  require(stride >= 1, "record_every must be at least 1");
  cfg.record_every = static_cast<Index>(stride);
  cfg.init = trim(merged.get("init"));
  require(cfg.init == "random" || cfg.init == "paper" || cfg.init == "aligned",
          "init must be random, paper or aligned");
  cfg.spectral = parse_bool(merged.get("spectral"));
  const long long offset = parse_integer(merged.get("measure_offset"));
  require(offset >= 0, "measure_offset must be non-negative");
  cfg.measure_offset = static_cast<Index>(offset);
  cfg.out = trim(merged.get("out"));
  const long long jobs = parse_integer(merged.get("jobs"));
  require(jobs >= 1, "jobs must be at least 1");
  cfg.jobs = static_cast<Index>(jobs);

  std::string canonical = "command=" + command + "\n";
  for (const auto &[k, v] : merged.entries())
    if (k != "out" && k != "jobs")
      canonical += k + "=" + v + "\n";
  cfg.canonical = canonical;
  cfg.hash = fnv1a_hex(canonical);
  return cfg;
}

ExperimentConfig build_config(const std::string &command,
                              const std::optional<std::string> &file,
                              const std::vector<std::string> &overrides) {
  ConfigMap merged = command_defaults(command);
  if (file)
    merged.merge(ConfigMap::load(*file));
  for (const auto &o : overrides)
    merged.set_assignment(o);
  return resolve_config(command, merged);
}

} // namespace gdmc

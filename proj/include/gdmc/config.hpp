#ifndef GDMC_CONFIG_HPP
#define GDMC_CONFIG_HPP

#include "gdmc/core.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gdmc {

/// Flat key/value configuration. Values stay textual until resolved so that
/// dimension-relative entries such as "0.1/n" can refer to the final n.
///
/// File syntax: one `key = value` per line, `#` starts a comment, lists
/// are comma separated.
class ConfigMap {
public:
  static ConfigMap parse(const std::string &text);
  static ConfigMap load(const std::string &path);

  void set(const std::string &key, const std::string &value);
  /// Applies a `key=value` override.
  void set_assignment(const std::string &assignment);
  /// Copies every entry of `other` over this map.
  void merge(const ConfigMap &other);

  bool has(const std::string &key) const { return values_.count(key) > 0; }
  const std::string &get(const std::string &key) const;
  const std::map<std::string, std::string> &entries() const { return values_; }

private:
  std::map<std::string, std::string> values_;
};

/// One reproducible experiment, fully resolved.
struct ExperimentConfig {
  std::string command;
  Index n = 1000;
  std::vector<double> eigenvalues{1.0};
  std::vector<double> p{0.1};
  double sigma = 0.0;
  std::vector<double> beta0;
  double eta = 0.1;
  std::optional<Index> T; ///< empty means the automatic T* horizon
  Index trials = 1;
  Seed seed = 1;
  std::string loo = "default"; ///< none | default | all | i,j,...
  Index record_every = 10;
  std::string init = "random"; ///< fig1: random | paper | aligned
  bool spectral = true;
  Index measure_offset = 100; ///< fig3: extra iterations past predicted T*
  std::string out = "out";
  Index jobs = 1;

  /// Canonical `key=value` lines of every entry that affects results
  /// (`out` and `jobs` excluded).
  std::string canonical;
  /// FNV-1a 64 of `canonical`, as 16 hex digits.
  std::string hash;

  Index rank() const { return static_cast<Index>(eigenvalues.size()); }
};

/// Built-in defaults for a command: fig1, fig2, fig3, fig4, run.
ConfigMap command_defaults(const std::string &command);

/// Parses and checks a merged map.
ExperimentConfig resolve_config(const std::string &command,
                                const ConfigMap &merged);

/// Defaults, then file, then CLI overrides.
ExperimentConfig build_config(const std::string &command,
                              const std::optional<std::string> &file,
                              const std::vector<std::string> &overrides);

/// Parses "a", "a/n" or "a*n" against dimension n.
double parse_scalar(const std::string &text, Index n);

std::string fnv1a_hex(const std::string &text);

} // namespace gdmc

#endif // GDMC_CONFIG_HPP

#ifndef GDMC_VALIDATE_HPP
#define GDMC_VALIDATE_HPP

#include "gdmc/io.hpp"

#include <string>
#include <vector>

namespace gdmc {

struct Check {
  std::string id;
  bool passed = false;
  double metric = 0.0;    ///< worst value observed
  double threshold = 0.0; ///< pass iff metric <= threshold
  std::string detail;
};

struct ValidateOptions {
  Index n = 32;
  Index seeds = 10;
  Seed seed = 20240611;
  /// Names a check whose input is deliberately corrupted ("mask_symmetry").
  std::string inject_fault;
};

/// Largest entrywise deviation of each fast operator from its dense oracle.
struct OracleDiffs {
  double observed_product = 0.0;
  double mo_product = 0.0;
  double loo_product = 0.0;
  double loo_mo_product = 0.0;
  double row_norms = 0.0;
  double loss = 0.0;
  double gradient = 0.0;

  double max() const;
};

/// Compares every sparse operator at X (and at every l) with the oracle.
OracleDiffs oracle_diffs(const Observation &obs, const Factor &X);

struct GradientCheck {
  double violation = 0.0; ///< max |g - fd| / (atol + rtol max(|g|, |fd|))
  double max_rel = 0.0;   ///< max |g - fd| / max(|g|, |fd|, 1e-300)
};

/// Central-difference check of gradient() with atol 1e-10, rtol 1e-5.
GradientCheck gradient_check(const Observation &obs, const Vector &x);

/// Number of directed entries (i, j), i != j, whose transpose is missing.
Index asymmetric_entries(const std::vector<std::pair<Index, Index>> &entries);

/// Runs the full invariant suite.
std::vector<Check> run_checks(const ValidateOptions &options = {});

io::Json to_json(const std::vector<Check> &checks);

} // namespace gdmc

#endif // GDMC_VALIDATE_HPP

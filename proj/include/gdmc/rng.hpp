#ifndef GDMC_RNG_HPP
#define GDMC_RNG_HPP

#include "gdmc/core.hpp"

#include <initializer_list>
#include <random>

namespace gdmc {

/// One step of the splitmix64 sequence; advances `state`.
std::uint64_t splitmix64(std::uint64_t &state);

/// Derives an independent child seed from a base seed and a path of stream
/// identifiers, e.g. derive_seed(base, {cell, trial, stream}).
Seed derive_seed(Seed base, std::initializer_list<std::uint64_t> path);

// Stream identifiers used when splitting a trial seed.
namespace stream {
inline constexpr std::uint64_t kGroundTruth = 1;
inline constexpr std::uint64_t kMask = 2;
inline constexpr std::uint64_t kNoise = 3;
inline constexpr std::uint64_t kInit = 4;
inline constexpr std::uint64_t kPower = 5;
} // namespace stream

/// Seedable generator with platform-independent output.
///
/// std::mt19937_64 is fully specified by the standard; the distributions in
/// <random> are not, so uniform and Gaussian draws are produced here.
class Rng {
public:
  explicit Rng(Seed seed);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via the Marsaglia polar method.
  double normal();

  std::uint64_t next_u64() { return engine_(); }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Fills an rows x cols factor with i.i.d. N(0, stddev^2) entries, row by row.
Factor gaussian_factor(Index rows, Index cols, double stddev, Seed seed);

} // namespace gdmc

#endif // GDMC_RNG_HPP

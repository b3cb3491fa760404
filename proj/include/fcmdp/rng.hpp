#pragma once

#include <cstdint>
#include <string_view>

namespace fcmdp {

/// Deterministic counter-based random stream (splitmix64). All randomness in
/// the project flows from a master seed through named streams derived with
/// derive(), so adding a consumer never perturbs the draws of another.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  /// Child stream keyed by a label. Stable across platforms.
  static RngStream derive(std::uint64_t master, std::string_view label);

  /// Seed for a child stream without constructing it.
  static std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

  std::uint64_t next_u64();

  /// Uniform in [0, 1).
  double uniform();

  /// Uniform in (0, 1]; used where log(u) must stay finite.
  double uniform_pos();

  /// Uniform integer in [0, n).
  int uniform_int(int n);

  /// Standard normal via Box-Muller (two draws per sample, no caching).
  double normal();

 private:
  std::uint64_t state_;
};

}  // namespace fcmdp

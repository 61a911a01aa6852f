#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace matfactor {

// Portable random source: std::mt19937_64 (its output sequence is fixed by the
// C++ standard) with uniforms built from the top 53 bits and normals from the
// Box-Muller transform. Library-provided distributions are avoided because
// their algorithms vary between standard library implementations.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/box-muller";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Uniform integer in [0, n), by rejection.
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Derived seed for replicate `index` of a study seeded with `seed`.
inline std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t index) { return seed + index; }

}  // namespace matfactor

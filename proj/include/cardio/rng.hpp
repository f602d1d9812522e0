#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace cardio {

/// SplitMix64 finalizer. Used to derive independent child seeds.
std::uint64_t mix64(std::uint64_t x);

/// Child seed for a named stage ("simulate", "sweep", "tsne", ...).
std::uint64_t derive_seed(std::uint64_t base, std::string_view stage);

/// Child seed for an integer-indexed sub-task (restart, cell, ...).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Portable random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are implementation-defined, so the
/// conversions to uniform reals, bounded integers and normals are done here:
///   uniform(): top 53 bits / 2^53, in [0, 1)
///   below(n):  rejection sampling on 64-bit draws
///   normal():  Marsaglia polar method, spare value cached
/// A given seed therefore yields the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  std::size_t below(std::size_t n);
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cardio

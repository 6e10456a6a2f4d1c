#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace molldeconv {

/// Seed for a named substream of a run-level seed ("noise", "kappa", "phases", ...).
std::uint64_t substream(std::uint64_t seed, std::string_view name);
std::uint64_t substream(std::uint64_t seed, std::uint64_t index);

/// Deterministic normal and uniform draws. std::mt19937_64 is fully specified by the standard;
/// the distribution transforms are written out here because the std:: ones are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Standard normal via Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace molldeconv

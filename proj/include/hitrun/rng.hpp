#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hitrun {

/// Seeded random stream. The engine is std::mt19937_64, whose output sequence
/// is fixed by the standard; the uniform and normal transforms are defined
/// here so that a seed reproduces the same draws on every platform.
class Rng {
public:
  static constexpr std::string_view algorithm =
      "mt19937_64 + splitmix64 stream derivation + marsaglia-polar normal (v1)";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via the Marsaglia polar method; the second value of
  /// each accepted pair is cached.
  double normal();

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Injective map (master, index) -> stream seed: the splitmix64 finalizer
/// applied to master + (index + 1) * 0x9E3779B97F4A7C15.
std::uint64_t derive_seed(std::uint64_t master_seed,
                          std::uint64_t stream_index) noexcept;

} // namespace hitrun

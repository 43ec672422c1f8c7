#pragma once

#include <array>
#include <cstdint>

namespace mfg::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

// Philox4x32-10 block function (Salmon et al., SC'11). Pure function of
// (counter, key); every draw in the library is addressed through it so that
// results never depend on evaluation order or thread schedule.
Counter philox4x32(Counter counter, Key key);

// Independent purposes get disjoint counter spaces.
enum class Purpose : std::uint32_t {
  kNoise = 1,
  kTheta = 2,
  kInitial = 3,
  kThinning = 4,
  kQuadrature = 5,
  kSampling = 6,
};

// splitmix64 finalizer; used to derive per-replicate seeds.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Random-access view of one substream: draw n is a pure function of
// (seed, purpose, stream, n).
class Substream {
 public:
  Substream(std::uint64_t seed, Purpose purpose, std::uint64_t stream);

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform(std::uint64_t n) const;
  // Standard normal via Box-Muller on one Philox block (two normals/block).
  double normal(std::uint64_t n) const;

 private:
  Counter block(std::uint64_t index) const;

  Key key_{};
  std::uint32_t stream_lo_ = 0;
  std::uint32_t stream_hi_and_purpose_ = 0;
};

}  // namespace mfg::rng

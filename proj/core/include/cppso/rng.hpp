#pragma once

#include <cstdint>

namespace cppso {

// splitmix64 finalizer; full avalanche, used both as a mixer and as the
// per-stream generator step.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Counter-based stream: the state advances by a fixed odd constant and each
// output is a mix of the state, so a stream is a pure function of
// (key, draw index). Streams with distinct keys are independent for Monte
// Carlo purposes.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : state_(key) {}

  std::uint64_t next_u64() { return mix64(state_ += kStep); }

  // Uniform in [0, 1), 53 bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n); n > 0. Rejection-free multiply-shift (Lemire); the
  // modular bias at n << 2^64 is far below anything observable here.
  std::uint32_t next_below(std::uint32_t n) {
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  static constexpr std::uint64_t kStep = 0x9e3779b97f4a7c15ull;
  std::uint64_t state_;
};

// Hierarchical derivation of stream keys: every reproducible component mixes
// its indices into a KeyChain, e.g.
//   KeyChain(seed).with(kChain).with(chain_id).with(epoch).stream()
// Identical chains of .with() calls always give identical streams, so results
// do not depend on scheduling or worker count.
class KeyChain {
 public:
  explicit KeyChain(std::uint64_t seed) : h_(mix64(seed ^ 0x5bf0363546e92799ull)) {}

  KeyChain with(std::uint64_t v) const {
    KeyChain k = *this;
    k.h_ = mix64(k.h_ ^ mix64(v));
    return k;
  }

  RngStream stream() const { return RngStream(h_); }
  std::uint64_t key() const { return h_; }

 private:
  std::uint64_t h_;
};

// Domain-separation tags for KeyChain derivations.
namespace rng_tag {
inline constexpr std::uint64_t kDataset = 1;
inline constexpr std::uint64_t kFilter = 2;
inline constexpr std::uint64_t kParticle = 3;
inline constexpr std::uint64_t kResample = 4;
inline constexpr std::uint64_t kPick = 5;
inline constexpr std::uint64_t kChain = 6;
inline constexpr std::uint64_t kEval = 7;
}  // namespace rng_tag

}  // namespace cppso

#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace hsbench::rng {

/// Philox4x32-10 block: a keyed bijection of a 128-bit counter.
/// (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3", SC'11.)
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Seed for a named sub-task (e.g. one scene), derived from a base seed so
/// that results depend on the label and not on processing order.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label);

/// Independent stream addressed by (seed, stream id, lane).
///
/// Draw n of a stream is a pure function of (seed, stream, lane, n), so any
/// element of a noise field can be reproduced without replaying the others
/// and results do not depend on iteration order or thread count.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t stream, std::uint32_t lane = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream),
        lane_(lane) {}

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1) with 53 bits of resolution.
  double uniform();
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via Box-Muller (both outputs of a pair are used).
  double normal();
  /// Poisson variate: sequential inversion for mean < 10, Hormann's PTRS
  /// transformed rejection otherwise.
  std::uint64_t poisson(double mean);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint32_t lane_;
  std::uint32_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hsbench::rng

#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace stigsim {

// Named deterministic sub-stream of a scenario seed. The stream state is the
// first 8 bytes (big-endian) of SHA-256(seed as 8-byte big-endian || name as
// UTF-8), advanced with the SplitMix64 step function. The derivation is part
// of the cross-implementation contract and is pinned by a golden file.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::string_view name);

    std::uint64_t next();

    // uniform draw in [0, bound), bound > 0; uses modulo reduction, which is
    // part of the pinned contract (not a statistics-grade generator)
    std::uint64_t next_below(std::uint64_t bound);

    // true with probability rate_micro / 1e6
    bool bernoulli_micro(std::uint64_t rate_micro);

  private:
    std::uint64_t state_;
};

}  // namespace stigsim

#include "stigsim/rng.hpp"

#include "stigsim/sha256.hpp"

namespace stigsim {

RngStream::RngStream(std::uint64_t seed, std::string_view name) {
    Sha256 h;
    std::uint8_t seed_be[8];
    for (int i = 0; i < 8; ++i) seed_be[i] = std::uint8_t(seed >> (56 - 8 * i));
    h.update(seed_be, sizeof(seed_be));
    h.update(name);
    const auto digest = h.finish();
    state_ = 0;
    for (int i = 0; i < 8; ++i) state_ = (state_ << 8) | digest[i];
}

std::uint64_t RngStream::next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t RngStream::next_below(std::uint64_t bound) { return next() % bound; }

bool RngStream::bernoulli_micro(std::uint64_t rate_micro) { return next_below(1000000) < rate_micro; }

}  // namespace stigsim

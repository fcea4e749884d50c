#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace stigsim {

// Incremental SHA-256 (FIPS 180-4). The simulator depends on bit-exact
// digests for state/trace hashing and the commit-reveal preimage, so the
// implementation is self-contained and pinned by test vectors.
class Sha256 {
  public:
    Sha256() { reset(); }

    void reset();
    void update(const void* data, std::size_t len);
    void update(std::string_view s) { update(s.data(), s.size()); }
    std::array<std::uint8_t, 32> finish();

    static std::array<std::uint8_t, 32> digest(std::string_view s);
    static std::array<std::uint8_t, 32> digest(const std::vector<std::uint8_t>& bytes);
    static std::string hex(std::string_view s);

  private:
    void process_block(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_{};
    std::array<std::uint8_t, 64> buffer_{};
    std::size_t buffered_ = 0;
    std::uint64_t total_len_ = 0;
};

std::string to_hex(const std::array<std::uint8_t, 32>& digest);
std::vector<std::uint8_t> hex_to_bytes(const std::string& hex);

}  // namespace stigsim

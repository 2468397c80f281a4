#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>

namespace fragdyn {

inline constexpr const char* kRngTag = "philox4x32-10/splitmix64-key/v1";

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Philox4x32 with 10 rounds (Salmon et al. 2011), wrapped as a bit generator.
// The key identifies a stream, the 64-bit block counter walks it.
class Philox {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  struct State {
    std::uint64_t key = 0;
    std::uint64_t counter = 0;
    std::uint32_t used = 4;
    bool operator==(const State&) const = default;
  };

  Philox() = default;
  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0) {
    st_.key = splitmix64(splitmix64(seed) ^ (stream * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  static Block block(Block ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      std::uint64_t p0 = std::uint64_t{0xD2511F53} * ctr[0];
      std::uint64_t p1 = std::uint64_t{0xCD9E8D57} * ctr[2];
      Block next{static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      ctr = next;
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    return ctr;
  }

  result_type operator()() {
    if (st_.used == 4) refill();
    return buf_[st_.used++];
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = (*this)();
    return (hi << 32) | (*this)();
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Exactly uniform integer in [0, n) by Lemire's multiply-and-reject.
  std::uint32_t bounded(std::uint32_t n) {
    std::uint64_t m = std::uint64_t{(*this)()} * n;
    auto low = static_cast<std::uint32_t>(m);
    if (low < n) {
      std::uint32_t threshold = static_cast<std::uint32_t>(-n) % n;
      while (low < threshold) {
        m = std::uint64_t{(*this)()} * n;
        low = static_cast<std::uint32_t>(m);
      }
    }
    return static_cast<std::uint32_t>(m >> 32);
  }

  // Child stream for run index `index`; independent of the parent's position.
  Philox split(std::uint64_t index) const {
    Philox child;
    child.st_.key = splitmix64(st_.key ^ splitmix64(index + 0x5851f42d4c957f2dULL));
    return child;
  }

  const State& state() const { return st_; }
  void set_state(const State& s) {
    st_ = s;
    if (st_.used < 4) {
      // Regenerate the partially consumed block.
      st_.counter -= 1;
      std::uint32_t used = st_.used;
      refill();
      st_.used = used;
    }
  }

 private:
  void refill() {
    Block ctr{static_cast<std::uint32_t>(st_.counter), static_cast<std::uint32_t>(st_.counter >> 32), 0, 0};
    Key key{static_cast<std::uint32_t>(st_.key), static_cast<std::uint32_t>(st_.key >> 32)};
    buf_ = block(ctr, key);
    st_.counter += 1;
    st_.used = 0;
  }

  State st_;
  Block buf_{};
};

}  // namespace fragdyn

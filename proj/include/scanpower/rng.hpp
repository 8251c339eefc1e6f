#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace scanpower {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for a named consumer of the run seed ("fill", "vectors", ...), so one
// integer reproduces every random stream of a run.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char ch : name) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(base ^ splitmix64(h));
}

// 32-bit maximal-length Galois LFSR (taps 32,22,2,1).
class Lfsr32 {
 public:
  explicit Lfsr32(std::uint64_t seed) {
    state_ = static_cast<std::uint32_t>(splitmix64(seed));
    if (state_ == 0) state_ = 1;
  }

  bool next_bit() {
    bool out = state_ & 1U;
    state_ >>= 1;
    if (out) state_ ^= 0x80200003U;
    return out;
  }

 private:
  std::uint32_t state_;
};

// `count` vectors of `length` bits from one LFSR stream.
inline std::vector<std::vector<bool>> lfsr_vectors(std::uint64_t seed, std::size_t count,
                                                   std::size_t length) {
  Lfsr32 lfsr(seed);
  std::vector<std::vector<bool>> out(count, std::vector<bool>(length));
  for (auto& v : out) {
    for (std::size_t i = 0; i < length; ++i) v[i] = lfsr.next_bit();
  }
  return out;
}

}  // namespace scanpower

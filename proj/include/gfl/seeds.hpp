#pragma once

// Named, independent random streams. Every draw in a simulation comes from
// an engine seeded by derive_seed(run_seed, stream, a, b), so results do not
// depend on evaluation order or on how many threads run the clients.

#include <cstdint>
#include <random>

namespace gfl {

enum class Stream : std::uint64_t {
  data = 1,
  partition = 2,
  init = 3,
  sgd = 4,
  channel = 5,
  split = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t run_seed, Stream stream, std::uint64_t a = 0,
                                 std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(run_seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
  h = splitmix64(h ^ a);
  return splitmix64(h ^ b);
}

inline std::mt19937_64 make_engine(std::uint64_t run_seed, Stream stream, std::uint64_t a = 0,
                                   std::uint64_t b = 0) {
  return std::mt19937_64(derive_seed(run_seed, stream, a, b));
}

/// FNV-1a over raw bytes; used to fingerprint random draws in reports.
class Fingerprint {
 public:
  void add(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  template <class T>
  void add_value(const T& v) {
    add(&v, sizeof(T));
  }
  std::uint64_t value() const noexcept { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace gfl

#pragma once

// Counter-keyed random streams. A stream is identified by (master seed,
// i, j); its state depends on nothing else, so results do not change with
// the order in which cells are evaluated or with the number of workers.

#include <pdrisk/types.hpp>

#include <cstdint>
#include <random>

namespace pdrisk {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace detail

/// Mixes (seed, i, j) into a 64-bit stream key.
inline constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t i,
                                          std::uint64_t j) {
    std::uint64_t h = detail::splitmix64(seed);
    h = detail::splitmix64(h ^ (i * 0xD1B54A32D192ED03ull));
    h = detail::splitmix64(h ^ (j * 0x8CB92BA72F3D8DD7ull));
    return h;
}

// Stream namespaces for the first key component. Sweep cells use the grid
// index directly; auxiliary draws use tags far above any grid size.
inline constexpr std::uint64_t stream_tag_search = 0xA5A5'0000'0000'0001ull;
inline constexpr std::uint64_t stream_tag_mc_risk = 0xA5A5'0000'0000'0002ull;
inline constexpr std::uint64_t stream_tag_event = 0xA5A5'0000'0000'0003ull;
inline constexpr std::uint64_t stream_tag_matrix = 0xA5A5'0000'0000'0004ull;
inline constexpr std::uint64_t stream_tag_signal = 0xA5A5'0000'0000'0005ull;
inline constexpr std::uint64_t stream_tag_gmw = 0xA5A5'0000'0000'0006ull;

/// Engine plus a standard normal distribution for one stream.
class NormalStream {
  public:
    NormalStream(std::uint64_t seed, std::uint64_t i, std::uint64_t j)
        : engine_(stream_key(seed, i, j)) {}

    double operator()() { return normal_(engine_); }

    Vector vector(Index n) {
        Vector v(n);
        for (Index k = 0; k < n; ++k)
            v[k] = normal_(engine_);
        return v;
    }

    std::mt19937_64 &engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

inline Vector standard_normal(Index n, std::uint64_t seed, std::uint64_t i,
                              std::uint64_t j) {
    return NormalStream(seed, i, j).vector(n);
}

} // namespace pdrisk

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fedtd {

// splitmix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Derives a child seed from a parent seed and an index. Children of the same
// parent are independent of each other, so adding agent i+1 never changes
// the stream of agent i.
constexpr std::uint64_t mix_seed(std::uint64_t parent, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(parent) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

constexpr std::uint64_t mix_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path) noexcept {
    for (auto index : path) parent = mix_seed(parent, index);
    return parent;
}

// Thin wrapper over mt19937_64. The engine's output sequence is fixed by the
// standard and the conversions below are written out by hand, so streams are
// reproducible across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    // [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // (0, 1]
    double uniform_open_closed() { return 1.0 - uniform01(); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace fedtd

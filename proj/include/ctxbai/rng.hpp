#pragma once

#include <cstdint>
#include <random>

namespace ctxbai {

// 64-bit mix (splitmix64 finalizer). Used to derive per-stream seeds and
// per-trial stream ids; the constants are fixed so derived streams are
// identical across platforms.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return mix64(mix64(a) ^ b);
}

// Seeded random stream. One stream is owned by exactly one trial; replaying
// the same (seed, stream) yields the same draw sequence bit for bit. The
// engine is std::mt19937_64, whose output sequence is pinned by the C++
// standard; doubles are produced by explicit bit manipulation rather than
// std::uniform_real_distribution, which is implementation-defined.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : engine_(mix64(seed, stream)) {}

    // Uniform draw in [0, 1), 53-bit resolution. Consumes one engine output.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace ctxbai

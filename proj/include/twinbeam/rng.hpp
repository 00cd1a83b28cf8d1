#pragma once

#include <cstdint>
#include <limits>

namespace twinbeam {

// Counter-based substream RNG.
//
// Contract: every random draw for shot i is a pure function of
// (master_seed, i, stage). Shot streams are therefore independent of the
// total shot count and of which worker generates them, so generation can
// fan out over disjoint index ranges and still merge deterministically.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256** (Blackman/Vigna, public domain), seeded via splitmix64.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

// Independent draw stages within one shot. Keeping the stages on separate
// substreams means adding draws to one stage never shifts another.
enum class RngStage : std::uint64_t {
    Source = 1,
    Collection = 2,
    Detection = 3,
    Dark = 4,
};

inline Xoshiro256 shot_rng(std::uint64_t master_seed, std::uint64_t shot_index, RngStage stage) {
    std::uint64_t s = master_seed;
    std::uint64_t a = splitmix64(s);
    s ^= shot_index * 0xd1342543de82ef95ULL;
    std::uint64_t b = splitmix64(s);
    s ^= static_cast<std::uint64_t>(stage) * 0x2545f4914f6cdd1dULL;
    std::uint64_t c = splitmix64(s);
    return Xoshiro256(a ^ b ^ c);
}

// Independent master seed for a numbered child run (e.g. one sweep point),
// so runs sharing a user seed do not share shot substreams.
inline std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t stream_index) {
    std::uint64_t s = master_seed ^ (stream_index * 0x9e3779b97f4a7c15ULL + 0x6a09e667f3bcc909ULL);
    const std::uint64_t a = splitmix64(s);
    const std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

} // namespace twinbeam

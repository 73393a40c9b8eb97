#pragma once

#include <cstdint>
#include <limits>

namespace slqg {

// xoshiro256++ used as a UniformRandomBitGenerator.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0x9d2c5680u);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        const std::uint64_t r = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return r;
    }

    // [0, 1)
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
    // (0, 1]
    double uniform_pos() noexcept { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

    double normal();
    double exponential();
    bool coin() noexcept { return ((*this)() >> 63) != 0; }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) noexcept;

private:
    static std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

// Counter-based derivation: the stream for (master, index) never depends on
// how many other streams exist or which thread consumes it.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept;
Rng make_stream(std::uint64_t master, std::uint64_t index);
Rng make_stream(std::uint64_t master, std::uint64_t index, std::uint64_t sub);

} // namespace slqg

#include "slqg/rng.hpp"

#include <boost/random/normal_distribution.hpp>
#include <cmath>

namespace slqg {

std::uint64_t splitmix64(std::uint64_t& state) noexcept
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed)
{
    std::uint64_t st = seed;
    for (auto& w : s_)
        w = splitmix64(st);
}

double Rng::normal()
{
    boost::random::normal_distribution<double> nd;
    return nd(*this);
}

double Rng::exponential() { return -std::log(uniform_pos()); }

std::uint64_t Rng::below(std::uint64_t n) noexcept
{
    // Lemire's multiply-shift with rejection of the biased zone
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
        const std::uint64_t thresh = (0 - n) % n;
        while (lo < thresh) {
            m = static_cast<unsigned __int128>((*this)()) * n;
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) noexcept
{
    std::uint64_t st = master;
    const std::uint64_t a = splitmix64(st);
    std::uint64_t st2 = a ^ (index * 0xd1b54a32d192ed03ull);
    splitmix64(st2);
    return splitmix64(st2);
}

Rng make_stream(std::uint64_t master, std::uint64_t index) { return Rng(stream_seed(master, index)); }

Rng make_stream(std::uint64_t master, std::uint64_t index, std::uint64_t sub)
{
    return Rng(stream_seed(stream_seed(master, index), sub));
}

} // namespace slqg

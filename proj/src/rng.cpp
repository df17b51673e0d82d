#include "stopspa/rng.hpp"

#include <bit>

namespace stopspa {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

RandomStream::RandomStream(std::uint64_t key) {
    std::uint64_t sm = key;
    for (auto& word : state_) word = splitmix64(sm);
}

RandomStream::result_type RandomStream::operator()() {
    auto& s = state_;
    const std::uint64_t result = std::rotl(s[0] + s[3], 23) + s[0];
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = std::rotl(s[3], 45);
    return result;
}

RandomStream RandomStreamFactory::stream(std::uint64_t rep, StreamPurpose purpose) const {
    std::uint64_t h = seed_;
    std::uint64_t key = splitmix64(h);
    h = key ^ rep;
    key = splitmix64(h);
    h = key ^ static_cast<std::uint64_t>(purpose);
    key = splitmix64(h);
    return RandomStream(key);
}

}  // namespace stopspa

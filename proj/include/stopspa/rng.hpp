#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace stopspa {

/// xoshiro256++ generator. Satisfies UniformRandomBitGenerator.
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t key);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    std::array<std::uint64_t, 4> state_;
};

/// Independent sub-streams inside one replication. Purposes never share draws, so
/// auxiliary continuations cannot desynchronize the nominal path.
enum class StreamPurpose : std::uint64_t {
    path = 0,
    auxiliary = 1,
    fd_minus = 2,
};

/// Maps (master seed, replication id, purpose) to a stream. The mapping is a pure
/// function, so results do not depend on scheduling or worker count.
class RandomStreamFactory {
public:
    explicit RandomStreamFactory(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    RandomStream stream(std::uint64_t rep, StreamPurpose purpose = StreamPurpose::path) const;

private:
    std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace stopspa

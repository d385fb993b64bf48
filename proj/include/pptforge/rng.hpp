#pragma once

#include <cstdint>
#include <limits>

namespace pptforge {

// Counter-based generator: output k of stream s is a SplitMix64 hash of (seed, s, k).
// Any sample can be regenerated without replaying earlier ones.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return at(counter_++); }

    result_type at(std::uint64_t k) const {
        std::uint64_t z = mix(seed_ + 0x9e3779b97f4a7c15ULL * (stream_ + 1)) ^ (k * 0xd1b54a32d192ed03ULL);
        return mix(z);
    }

    std::uint64_t counter() const { return counter_; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_, stream_;
    std::uint64_t counter_ = 0;
};

}  // namespace pptforge

#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace gsac {

inline uint64_t splitmix64(uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive a child seed from a parent seed and a sequence of tags.
inline uint64_t derive_seed(uint64_t base, std::initializer_list<uint64_t> tags)
{
    uint64_t h = splitmix64(base);
    for (uint64_t t : tags)
        h = splitmix64(h ^ splitmix64(t + 0x632be59bd9b4e019ULL));
    return h;
}

// Named sub-stream tags.
enum StreamTag : uint64_t {
    kTagPhase1 = 101,
    kTagMeta = 102,
    kTagAdapt = 103,
    kTagEval = 104,
    kTagDomain = 105,
    kTagReset = 106,
    kTagStep = 107,
    kTagAction = 108,
    kTagBuild = 109,
    kTagEstimate = 110,
    kTagSource = 111,
};

// Counter-free splitmix64 generator; cheap to construct per agent per step.
class Stream {
public:
    using result_type = uint64_t;

    explicit Stream(uint64_t seed) : state_(seed) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        state_ += 0x9e3779b97f4a7c15ULL;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    int uniform_int(int n) { return static_cast<int>(uniform() * n); }

private:
    uint64_t state_;
};

} // namespace gsac

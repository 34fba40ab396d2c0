#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace pompkit {

/// Purpose tags mixed into stream keys so that, e.g., the process noise of
/// particle 7 at time 3 never shares bits with its resampling uniform.
enum class Stream : std::uint64_t {
    init = 1,
    process = 2,
    measure = 3,
    resample = 4,
    perturb = 5,
    select = 6,
    evaluate = 7,
    user = 8,
};

/// Counter-based random stream (SplitMix64 output function applied to
/// key + counter). Streams are addressed by the tuple that built the key, so
/// results never depend on scheduling order.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t key) : key_(key) {}

    Rng(std::uint64_t seed, Stream tag, std::initializer_list<std::uint64_t> path)
        : key_(derive(seed, tag, path))
    {
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()()
    {
        ++counter_;
        return mix(key_ + counter_ * kGolden);
    }

    /// Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    double normal()
    {
        std::normal_distribution<double> d;
        return d(*this);
    }

    std::uint64_t key() const { return key_; }

    static constexpr std::uint64_t mix(std::uint64_t z)
    {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t derive(std::uint64_t seed, Stream tag, std::initializer_list<std::uint64_t> path)
    {
        std::uint64_t k = mix(seed + kGolden);
        k = mix(k ^ mix(static_cast<std::uint64_t>(tag) * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL));
        for (auto p : path) {
            k = mix(k ^ mix(p + 0xd1b54a32d192ed03ULL));
        }
        return k;
    }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace pompkit

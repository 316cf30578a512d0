#ifndef RANDPOLY_RNG_HPP
#define RANDPOLY_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace randpoly {

/// SplitMix64 finalizer; used to derive statistically independent seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t key, std::uint64_t id) noexcept
{
    return mix64(key ^ mix64(id + 0x632be59bd9b4e019ULL));
}

/// FNV-1a over a string, for turning labels into substream ids.
constexpr std::uint64_t hash_label(std::string_view s) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// A random stream identified by a 64-bit key. Substreams are derived by
/// hashing (key, id), so any task can reconstruct its stream from the ids
/// alone, independent of scheduling.
class Stream {
public:
    explicit Stream(std::uint64_t seed = 0) : key_(mix64(seed)), engine_(key_) {}

    static Stream from_key(std::uint64_t key)
    {
        Stream s;
        s.key_ = key;
        s.engine_.seed(key);
        return s;
    }

    [[nodiscard]] Stream substream(std::uint64_t id) const { return from_key(hash_combine(key_, id)); }
    [[nodiscard]] Stream substream(std::string_view label) const { return substream(hash_label(label)); }

    [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
    std::mt19937_64& engine() noexcept { return engine_; }

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    double exponential() { return exponential_(engine_); }
    /// +1 or -1 with equal probability.
    double sign() { return (engine_() >> 63) ? 1.0 : -1.0; }

private:
    std::uint64_t key_ = 0;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    std::exponential_distribution<double> exponential_{1.0};
};

} // namespace randpoly

#endif // RANDPOLY_RNG_HPP

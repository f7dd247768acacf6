#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace mixlt {

//---------------------------------------------------------------------------//
/*!
 * Philox4x32 with 10 rounds (Salmon et al., SC 2011).
 *
 * A keyed bijection of 128-bit counters. Every random quantity in the
 * library is a pure function of (key, counter), so results never depend on
 * the order in which samples are evaluated.
 */
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr std::uint32_t kMulA = 0xD2511F53u;
    static constexpr std::uint32_t kMulB = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
    static constexpr std::uint32_t kWeylB = 0xBB67AE85u;

    static constexpr Counter apply(Counter ctr, Key key) noexcept
    {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{kMulA} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMulB} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += kWeylA;
            key[1] += kWeylB;
        }
        return ctr;
    }

    // Two 64-bit words from one block. `domain` separates independent uses
    // of the same key (draws, splits, symbolic coordinates).
    static constexpr std::array<std::uint64_t, 2>
    block(std::uint64_t key, std::uint64_t index, std::uint32_t domain) noexcept
    {
        const Counter out = apply(
            {static_cast<std::uint32_t>(index),
             static_cast<std::uint32_t>(index >> 32), domain, 0u},
            {static_cast<std::uint32_t>(key),
             static_cast<std::uint32_t>(key >> 32)});
        return {(std::uint64_t{out[1]} << 32) | out[0],
                (std::uint64_t{out[3]} << 32) | out[2]};
    }
};

namespace rng_domain {
inline constexpr std::uint32_t draw = 0;
inline constexpr std::uint32_t split = 1;
inline constexpr std::uint32_t symbol = 2;
}  // namespace rng_domain

// Map 64 random bits to a double in [0, 1).
constexpr double to_unit(std::uint64_t bits) noexcept
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

//---------------------------------------------------------------------------//
/*!
 * A named, splittable random stream.
 *
 * A stream is a key plus a position. `split(id)` derives an independent
 * child key; the child depends only on the parent key and the id, never on
 * how many values the parent has produced. Monte Carlo sample i always uses
 * `root.split(i)`, which makes results independent of the worker count.
 */
class Stream {
  public:
    explicit Stream(std::uint64_t seed) noexcept
        : key_(Philox4x32::block(seed, 0x6d69786c74ull, rng_domain::split)[0])
    {
    }

    [[nodiscard]] Stream split(std::uint64_t id) const noexcept
    {
        Stream child{*this};
        child.key_ = Philox4x32::block(key_, id, rng_domain::split)[1];
        child.position_ = 0;
        child.cached_ = false;
        child.has_spare_normal_ = false;
        return child;
    }

    std::uint64_t next_u64() noexcept
    {
        const std::uint64_t block_index = position_ >> 1;
        if (!cached_ || cached_index_ != block_index) {
            cache_ = Philox4x32::block(key_, block_index, rng_domain::draw);
            cached_index_ = block_index;
            cached_ = true;
        }
        return cache_[position_++ & 1];
    }

    double uniform() noexcept { return to_unit(next_u64()); }

    // Uniform on (0, 1]; safe inside log().
    double uniform_positive() noexcept { return 1.0 - uniform(); }

    double normal() noexcept
    {
        if (has_spare_normal_) {
            has_spare_normal_ = false;
            return spare_normal_;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform_positive()));
        const double angle = 2.0 * std::numbers::pi * uniform();
        spare_normal_ = radius * std::sin(angle);
        has_spare_normal_ = true;
        return radius * std::cos(angle);
    }

    double exponential() noexcept { return -std::log(uniform_positive()); }

    // Uniform integer in [0, bound), bound > 0 (Lemire's method, unbiased).
    std::uint64_t below(std::uint64_t bound) noexcept
    {
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
    [[nodiscard]] std::uint64_t position() const noexcept { return position_; }

  private:
    std::uint64_t key_;
    std::uint64_t position_ = 0;
    std::array<std::uint64_t, 2> cache_{};
    std::uint64_t cached_index_ = 0;
    bool cached_ = false;
    double spare_normal_ = 0.0;
    bool has_spare_normal_ = false;
};

}  // namespace mixlt

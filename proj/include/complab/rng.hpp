#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace complab {

//---------------------------------------------------------------------------//
/*!
 * Philox4x32-10 counter-based block cipher (Salmon et al., SC'11).
 *
 * Maps a 128-bit counter and a 64-bit key to 128 pseudorandom bits with no
 * internal state, so any (key, counter) can be evaluated independently on
 * any thread.
 */
class Philox4x32 {
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter generate(Counter ctr, Key key) noexcept
    {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kW0;
                key[1] += kW1;
            }
            std::uint64_t const p0 = std::uint64_t{kM0} * ctr[0];
            std::uint64_t const p1 = std::uint64_t{kM1} * ctr[2];
            auto const hi0 = static_cast<std::uint32_t>(p0 >> 32);
            auto const lo0 = static_cast<std::uint32_t>(p0);
            auto const hi1 = static_cast<std::uint32_t>(p1 >> 32);
            auto const lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

  private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

// Independent random streams carved out of one user seed.
enum class StreamTag : std::uint32_t {
    paths = 1,
    monte_carlo = 2,
    probes = 3,
    test = 0xFFFF,
};

//---------------------------------------------------------------------------//
/*!
 * Standard normal draws addressed by (seed, stream, path, step, component).
 *
 * Draw values depend only on their address, never on evaluation order, which
 * is what makes the parallel kernels reproduce their serial references bit
 * for bit.
 */
class NormalStream {
  public:
    NormalStream(std::uint64_t seed, StreamTag stream, std::uint64_t path) noexcept
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)},
          stream_(static_cast<std::uint32_t>(stream)),
          path_(path)
    {
    }

    // Fill `out` with independent N(0,1) draws for the given step.
    void normals(std::uint64_t step, std::span<double> out) const noexcept
    {
        std::size_t j = 0;
        for (std::uint32_t block = 0; j < out.size(); ++block) {
            auto const pair = gaussian_pair(step, block);
            out[j++] = pair[0];
            if (j < out.size()) {
                out[j++] = pair[1];
            }
        }
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform(std::uint64_t step, std::uint32_t block = 0) const noexcept
    {
        auto const bits = raw(step, block);
        return to_unit(combine(bits[0], bits[1]));
    }

    Philox4x32::Counter raw(std::uint64_t step, std::uint32_t block) const noexcept
    {
        Philox4x32::Counter const ctr{
            static_cast<std::uint32_t>(step),
            (stream_ << 16) ^ block ^ (static_cast<std::uint32_t>(step >> 32) << 24),
            static_cast<std::uint32_t>(path_),
            static_cast<std::uint32_t>(path_ >> 32)};
        return Philox4x32::generate(ctr, key_);
    }

  private:
    static constexpr std::uint64_t combine(std::uint32_t lo, std::uint32_t hi) noexcept
    {
        return (std::uint64_t{hi} << 32) | lo;
    }

    static constexpr double to_unit(std::uint64_t bits) noexcept
    {
        return static_cast<double>(bits >> 11) * 0x1.0p-53;
    }

    // Box-Muller on one Philox block.
    std::array<double, 2> gaussian_pair(std::uint64_t step, std::uint32_t block) const noexcept
    {
        auto const bits = raw(step, block);
        double const u1 = 1.0 - to_unit(combine(bits[0], bits[1]));  // (0, 1]
        double const u2 = to_unit(combine(bits[2], bits[3]));
        double const radius = std::sqrt(-2.0 * std::log(u1));
        double const angle = 2.0 * std::numbers::pi * u2;
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

    Philox4x32::Key key_;
    std::uint32_t stream_;
    std::uint64_t path_;
};

}  // namespace complab

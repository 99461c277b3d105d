#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace mseq {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
/// Stateless: the output is a pure function of (key, counter).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            ctr = single_round(ctr, key);
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static Counter single_round(const Counter& c, const Key& k) noexcept {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

/// Random stream addressed by (seed, stream, index). Every draw is independent
/// of evaluation order, so replications can run on any number of threads.
class KeyedStream {
public:
    KeyedStream(std::uint64_t seed, std::uint64_t stream) noexcept : seed_(seed), stream_(stream) {}

    /// Uniform in (0, 1) with 53-bit resolution, for (index, lane) with lane in {0, 1}.
    double uniform(std::uint64_t index, unsigned lane = 0) const noexcept {
        const auto words = block(index);
        const std::uint64_t bits = (static_cast<std::uint64_t>(words[2 * lane]) << 32) | words[2 * lane + 1];
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (cosine branch) on the index's two lanes.
    double normal(std::uint64_t index) const noexcept {
        const auto words = block(index);
        const std::uint64_t b0 = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
        const std::uint64_t b1 = (static_cast<std::uint64_t>(words[2]) << 32) | words[3];
        const double u1 = (static_cast<double>(b0 >> 11) + 0.5) * 0x1.0p-53;
        const double u2 = (static_cast<double>(b1 >> 11) + 0.5) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    Philox4x32::Counter block(std::uint64_t index) const noexcept {
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                                      static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        const Philox4x32::Key key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
        return Philox4x32::generate(ctr, key);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
};

} // namespace mseq

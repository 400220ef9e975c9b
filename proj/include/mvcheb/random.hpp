#ifndef MVCHEB_RANDOM_HPP
#define MVCHEB_RANDOM_HPP

#include "mvcheb/error.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>

namespace mvcheb
{

/// Philox4x32-10 (Salmon et al., SC'11). Stateless: output is a pure function
/// of the 128-bit counter and 64-bit key.
struct Philox4x32
{
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static constexpr Counter apply(Counter ctr, Key key) noexcept
    {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }
};

/// Uniform on the open interval (0, 1) with 52-bit resolution; the largest
/// output is 1 - 2^-53.
constexpr double to_open_unit(std::uint64_t bits) noexcept
{
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Deterministic stream of uniforms and standard normals.
///
/// The Philox key is the 64-bit seed. The counter holds (position, stream
/// index, block): `block` lets callers give every sample its own sub-stream,
/// so sample i is identical no matter how a run is split across workers.
/// A stream is single-owner; copy it to fork.
class RandomStream
{
public:
    explicit RandomStream(std::uint64_t seed, std::uint32_t stream_index = 0, std::uint64_t block = 0) noexcept
        : seed_(seed)
        , stream_index_(stream_index)
        , block_(block)
    {
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint32_t stream_index() const noexcept { return stream_index_; }
    std::uint64_t block() const noexcept { return block_; }
    /// Number of Philox blocks consumed so far.
    std::uint32_t position() const noexcept { return position_; }

    double uniform()
    {
        if (spare_uniform_) {
            const double u = *spare_uniform_;
            spare_uniform_.reset();
            return u;
        }
        const auto [u0, u1] = next_pair();
        spare_uniform_ = u1;
        return u0;
    }

    /// Box-Muller on one fresh pair of uniforms; both outputs are used.
    double standard_normal()
    {
        if (spare_normal_) {
            const double z = *spare_normal_;
            spare_normal_.reset();
            return z;
        }
        const auto [u0, u1] = next_pair();
        const double radius = std::sqrt(-2.0 * std::log(u0));
        const double angle = 2.0 * std::numbers::pi * u1;
        spare_normal_ = radius * std::sin(angle);
        return radius * std::cos(angle);
    }

private:
    std::array<double, 2> next_pair()
    {
        if (position_ == std::numeric_limits<std::uint32_t>::max()) {
            throw Error(ErrorKind::InvalidSpec, "random stream block exhausted (2^32 draws)");
        }
        const Philox4x32::Counter ctr{position_, stream_index_, static_cast<std::uint32_t>(block_),
                                      static_cast<std::uint32_t>(block_ >> 32)};
        const Philox4x32::Key key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
        ++position_;
        const auto out = Philox4x32::apply(ctr, key);
        const std::uint64_t a = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
        const std::uint64_t b = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
        return {to_open_unit(a), to_open_unit(b)};
    }

    std::uint64_t seed_;
    std::uint32_t stream_index_;
    std::uint64_t block_;
    std::uint32_t position_ = 0;
    std::optional<double> spare_uniform_;
    std::optional<double> spare_normal_;
};

inline double standard_normal(RandomStream& stream) { return stream.standard_normal(); }

} // namespace mvcheb

#endif // MVCHEB_RANDOM_HPP

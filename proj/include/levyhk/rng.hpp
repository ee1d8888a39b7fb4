#pragma once

// Counter-based random streams (Philox4x32-10).  Every simulated path owns the
// stream keyed by (seed, path index), so draws are independent of scheduling
// and a path can be reproduced in isolation.

#include <array>
#include <cmath>
#include <cstdint>

#include "common.hpp"

namespace levyhk {

namespace philox {

inline constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
inline constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t(M0) * ctr[0];
        const std::uint64_t p1 = std::uint64_t(M1) * ctr[2];
        ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
               std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

} // namespace philox

class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream)
        : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
          base_{std::uint32_t(stream), std::uint32_t(stream >> 32), 0u, 0u} {}

    double uniform() { // strictly inside (0, 1)
        const std::uint64_t x = next64();
        return (double(x >> 11) + 0.5) * 0x1p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform(), u2 = uniform();
        const double rho = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * PI * u2;
        spare_ = rho * std::sin(th);
        have_spare_ = true;
        return rho * std::cos(th);
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    Point unit_vector(int d) {
        Point p = Point::zero(d);
        if (d == 1) {
            p[0] = uniform() < 0.5 ? -1.0 : 1.0;
            return p;
        }
        double n = 0.0;
        do {
            for (int i = 0; i < d; ++i) p[i] = normal();
            n = p.norm();
        } while (n < 1e-12);
        for (int i = 0; i < d; ++i) p[i] /= n;
        return p;
    }

private:
    std::uint64_t next64() {
        if (have_ == 0) {
            buf_ = philox::block(base_, key_);
            if (++base_[2] == 0) ++base_[3];
            have_ = 4;
        }
        const std::uint32_t a = buf_[4 - have_];
        const std::uint32_t b = buf_[5 - have_];
        have_ -= 2;
        return (std::uint64_t(a) << 32) | b;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> base_;
    std::array<std::uint32_t, 4> buf_{};
    int have_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace levyhk

#pragma once

// Bessel J of the orders that appear in radial Fourier inversion in dimensions
// 1..8 (nu = dim/2 - 1 and dim/2), their positive zeros, and the Macdonald
// function K_s evaluated through its integral representation in a logarithmic
// variable.
//
// Half-integer orders use exact trigonometric forms (these carry the
// tight-tolerance paths); integer orders use a power series below the
// asymptotic range and a min-term-truncated Hankel expansion above it.

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "common.hpp"

namespace levyhk {

namespace detail {

// power series sum_{m>=0} (-1)^m (x/2)^{nu+2m} / (m! Gamma(nu+m+1)); fine for small x
inline double besselj_series(double nu, double x) {
    const double q = 0.25 * x * x;
    double term = std::pow(0.5 * x, nu) / std::tgamma(nu + 1.0);
    KahanSum s;
    s.add(term);
    for (int m = 1; m < 200; ++m) {
        term *= -q / (double(m) * (nu + double(m)));
        s.add(term);
        if (std::abs(term) < 1e-18 * (std::abs(s.value()) + 1e-300)) break;
    }
    return s.value();
}

// Hankel asymptotic expansion, terms truncated at the smallest one
inline double besselj_asymp(double nu, double x) {
    const double mu = 4.0 * nu * nu;
    const double omega = x - 0.5 * nu * PI - 0.25 * PI;
    double t = 1.0;        // running term t_k = prod (mu - (2j-1)^2) / (j * 8x)
    double p = 1.0, q = 0.0;
    double prev = INF;
    for (int k = 1; k < 40; ++k) {
        const double f = (2.0 * k - 1.0);
        t *= (mu - f * f) / (double(k) * 8.0 * x);
        if (std::abs(t) >= prev) break;
        prev = std::abs(t);
        const int m = k / 2;
        const double sgn = (m % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 1) q += sgn * t;
        else            p += sgn * t;
        if (std::abs(t) < 1e-17) break;
    }
    return std::sqrt(2.0 / (PI * x)) * (p * std::cos(omega) - q * std::sin(omega));
}

inline double j0_impl(double x) {
    x = std::abs(x);
    if (x < 12.0) return besselj_series(0.0, x);
    return besselj_asymp(0.0, x);
}

inline double j1_impl(double x) {
    const double ax = std::abs(x);
    const double v = (ax < 12.0) ? besselj_series(1.0, ax) : besselj_asymp(1.0, ax);
    return x < 0 ? -v : v;
}

} // namespace detail

// J_nu(x) for x >= 0 and nu in {-1/2, 0, 1/2, 1, 3/2, 2, 5/2, 3, ...}
inline double besselj(double nu, double x) {
    if (x < 0) throw std::invalid_argument("besselj: x must be >= 0");
    const double half = nu - std::floor(nu);
    const bool half_integer = std::abs(half - 0.5) < 1e-12;

    if (half_integer) {
        if (x == 0.0) return nu < 0 ? INF : 0.0;
        if (x < 0.5) {
            // closed forms below cancel for small x; series is exact-safe here
            return detail::besselj_series(nu, x);
        }
        const double f = std::sqrt(2.0 / (PI * x));
        if (nu == -0.5) return f * std::cos(x);
        if (nu == 0.5) return f * std::sin(x);
        if (nu == 1.5) return f * (std::sin(x) / x - std::cos(x));
        if (nu == 2.5) return f * ((3.0 / (x * x) - 1.0) * std::sin(x) - 3.0 * std::cos(x) / x);
        // upward recurrence from J_{1/2}, J_{3/2}; stable once x is not tiny
        double jm = f * std::sin(x);
        double jc = f * (std::sin(x) / x - std::cos(x));
        double order = 1.5;
        while (order < nu - 1e-9) {
            if (x < order + 2.0) return detail::besselj_series(nu, x);
            const double jn = (2.0 * order / x) * jc - jm;
            jm = jc;
            jc = jn;
            order += 1.0;
        }
        return jc;
    }

    const int n = int(std::lround(nu));
    if (n == 0) return detail::j0_impl(x);
    if (n == 1) return detail::j1_impl(x);
    if (x < n + 2.0) return detail::besselj_series(nu, x);
    double jm = detail::j0_impl(x), jc = detail::j1_impl(x);
    for (int k = 1; k < n; ++k) {
        const double jn = (2.0 * k / x) * jc - jm;
        jm = jc;
        jc = jn;
    }
    return jc;
}

inline double besselj_deriv(double nu, double x) {
    if (nu == 0.0) return -besselj(1.0, x);
    return 0.5 * (besselj(nu - 1.0, x) - besselj(nu + 1.0, x));
}

// k-th positive zero of J_nu (k >= 1): McMahon expansion polished by Newton
inline double besselj_zero(double nu, long long k) {
    if (k < 1) throw std::invalid_argument("besselj_zero: k >= 1");
    if (std::abs(nu + 0.5) < 1e-12) return (double(k) - 0.5) * PI;
    if (std::abs(nu - 0.5) < 1e-12) return double(k) * PI;
    const double mu = 4.0 * nu * nu;
    const double b = (double(k) + 0.5 * nu - 0.25) * PI;
    const double b8 = 8.0 * b;
    double z = b - (mu - 1.0) / b8
                 - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8 * b8 * b8);
    for (int it = 0; it < 3; ++it) {
        const double f = besselj(nu, z);
        const double df = besselj_deriv(nu, z);
        if (df == 0.0) break;
        const double step = f / df;
        z -= step;
        if (std::abs(step) < 1e-14 * z) break;
    }
    return z;
}

// ---------------------------------------------------------------------------
// Macdonald function K_s(x), s >= 0, x > 0, via
//   K_s(x) = 2^{-1-s} x^s Integral_0^inf e^{-u} e^{-x^2/(4u)} u^{-1-s} du
// with u = e^v; the transformed integrand decays double-exponentially, so the
// trapezoid rule converges geometrically.  Computed in scaled form e^x K_s(x).

struct MacdonaldResult {
    double value = 0.0;      // K_s(x)
    double scaled = 0.0;     // e^x K_s(x)
    bool underflowed = false;
};

inline MacdonaldResult macdonald_k(double s, double x) {
    if (!(x > 0.0) || s < 0.0)
        throw std::invalid_argument("macdonald_k: need x > 0, s >= 0");
    // exponent g(v) = e^v + (x^2/4) e^{-v} + s v; vertex at e^v = (-s + sqrt(s^2 + x^2))/2
    const double E = 0.5 * (-s + std::sqrt(s * s + x * x));
    const double vstar = std::log(E);
    const auto h_of = [&](double v) { // x - g(v), peak-relative log height
        return x - (std::exp(v) + 0.25 * x * x * std::exp(-v) + s * v);
    };
    const double hpeak = h_of(vstar);
    const auto f = [&](double v) { return std::exp(h_of(v) - hpeak); };

    // expand symmetric-ish bounds until the integrand is negligible
    double vlo = vstar, vhi = vstar;
    while (f(vlo) > 1e-20 && vstar - vlo < 900.0) vlo -= 1.0;
    while (f(vhi) > 1e-20 && vhi - vstar < 900.0) vhi += 1.0;

    double h = 0.5;
    double prev = 0.0;
    double integral = 0.0;
    for (int level = 0; level < 14; ++level) {
        KahanSum acc;
        const int n = int((vhi - vlo) / h);
        for (int i = 0; i <= n; ++i) {
            const double v = vlo + h * i;
            const double w = (i == 0 || i == n) ? 0.5 : 1.0;
            acc.add(w * f(v));
        }
        integral = acc.value() * h;
        if (level > 1 && std::abs(integral - prev) <= 5e-15 * std::abs(integral)) break;
        prev = integral;
        h *= 0.5;
    }

    // e^x K_s = 2^{-1-s} x^s e^{hpeak} * integral
    const double log_scaled = (-1.0 - s) * std::log(2.0) + s * std::log(x) + hpeak + std::log(integral);
    MacdonaldResult out;
    out.scaled = std::exp(log_scaled);
    const double logv = log_scaled - x;
    if (logv < -740.0) {
        out.value = 0.0;
        out.underflowed = true;
    } else {
        out.value = std::exp(logv);
    }
    return out;
}

} // namespace levyhk

#pragma once

// Ladder-height machinery for the radial one-dimensional projection: the
// ladder Laplace exponent kappa, the renewal function V recovered from
// 1/(xi kappa(xi)) by real-axis Laplace inversion, its monotone inverse and
// derivative tables, the condition-(H) constant, and the V-related
// comparability checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <vector>

#include "common.hpp"
#include "model.hpp"
#include "quadrature.hpp"

namespace levyhk {

// kappa(xi) = exp{ (1/pi) Int_0^inf log psi(xi z) / (1+z^2) dz }, evaluated
// after z = tan(u).  The transformed integrand has only logarithmic endpoint
// growth, which tanh-sinh absorbs; for psi = s^alpha the odd part integrates
// to zero exactly and kappa(xi) = xi^{alpha/2}.
inline double ladder_exponent(const SymbolEvaluator& sym, double xi) {
    if (!(xi > 0.0)) throw config_error("ladder_exponent: xi must be positive");
    const QuadResult q = tanh_sinh(
        [&](double u) { return sym.log_psi(xi * std::tan(u)); }, 0.0, 0.5 * PI, 1e-13);
    // the integral can be exactly zero (kappa = 1), so judge absolute error:
    // kappa carries a relative error of abs_err/pi
    if (!q.converged && !(q.abs_err <= 1e-8))
        throw numeric_error("ladder_exponent: quadrature did not converge");
    return std::exp(q.value / PI);
}

namespace detail {

// Gaver-Stehfest weights for an even number of terms n; every intermediate
// stays below 2^53 for n <= 18, so the alternating sums are exact in double.
inline std::vector<double> gaver_stehfest_weights(int n) {
    if (n < 2 || n % 2 != 0 || n > 18)
        throw config_error("gaver_stehfest_weights: n must be even, 2..18");
    const int h = n / 2;
    auto choose = [](int a, int b) {
        double r = 1.0;
        for (int i = 1; i <= b; ++i) r = r * double(a - b + i) / double(i);
        return r;
    };
    double hfact = 1.0;
    for (int i = 2; i <= h; ++i) hfact *= double(i);
    std::vector<double> w(std::size_t(n) + 1, 0.0);
    for (int k = 1; k <= n; ++k) {
        double s = 0.0;
        for (int j = (k + 1) / 2; j <= std::min(k, h); ++j)
            s += std::pow(double(j), h + 1) / hfact * choose(h, j) * choose(2 * j, j) *
                 choose(j, k - j);
        w[std::size_t(k)] = ((h + k) % 2 == 0 ? s : -s);
    }
    return w;
}

} // namespace detail

// Renewal function with its derived tables.  Construction inverts the Laplace
// transform on a log grid, monotonizes by running maximum, and records how far
// the 16-term and 8-term inversions disagree; if the raw output is
// non-monotone beyond tolerance the table falls back to the surrogate
// 1/sqrt(psi_star(1/r)) and says so.
class RenewalFunction {
public:
    static constexpr double R_MIN = 1e-7;
    static constexpr double R_MAX = 1e4;

    explicit RenewalFunction(const SymbolEvaluator& sym) : sym_(sym) { build(); }

    const SymbolEvaluator& symbol() const { return sym_; }

    double kappa(double xi) const { return ladder_exponent(sym_, xi); }

    // single-point Gaver-Stehfest inversion of 1/(xi kappa(xi))
    double V_raw(double x, int order = 16) const {
        if (!(x > 0.0)) return 0.0;
        const std::vector<double> w = detail::gaver_stehfest_weights(order);
        const double l2x = std::log(2.0) / x;
        KahanSum s;
        for (int k = 1; k <= order; ++k) {
            const double xi = double(k) * l2x;
            s.add(w[std::size_t(k)] / (xi * kappa(xi)));
        }
        return l2x * s.value();
    }

    double V(double r) const {
        if (!(r > 0.0)) return 0.0;
        return table_(r);
    }

    double V_prime(double r) const {
        if (!(r > 0.0)) throw config_error("V_prime: r must be positive");
        return prime_(r);
    }

    double V_inv(double v) const {
        if (!(v > 0.0)) return 0.0;
        return inverse_(v);
    }

    double surrogate(double r) const {
        if (!(r > 0.0)) return 0.0;
        return 1.0 / std::sqrt(sym_.psi_star(1.0 / r));
    }

    bool inversion_stable() const { return inversion_stable_; }
    bool surrogate_substituted() const { return substituted_; }
    // worst relative disagreement between the 16- and 8-term inversions
    double gs_disagreement() const { return gs_disagreement_; }
    // worst relative non-monotone dip in the raw inversion
    double raw_dip() const { return raw_dip_; }

    const std::vector<double>& grid() const { return grid_; }

    void write_csv(std::ostream& os) const {
        os << "r,V,V_surrogate,V_prime\n";
        for (double r : grid_)
            os << r << ',' << V(r) << ',' << surrogate(r) << ',' << V_prime(r) << '\n';
    }

private:
    void build() {
        grid_ = log_grid(R_MIN, R_MAX, 331);
        const std::vector<double> w16 = detail::gaver_stehfest_weights(16);
        const std::vector<double> w8 = detail::gaver_stehfest_weights(8);
        std::vector<double> raw(grid_.size());
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            const double l2x = std::log(2.0) / grid_[i];
            double f[17];
            for (int k = 1; k <= 16; ++k) {
                const double xi = double(k) * l2x;
                f[k] = 1.0 / (xi * kappa(xi));
            }
            KahanSum s16, s8;
            for (int k = 1; k <= 16; ++k) s16.add(w16[std::size_t(k)] * f[k]);
            for (int k = 1; k <= 8; ++k) s8.add(w8[std::size_t(k)] * f[k]);
            raw[i] = l2x * s16.value();
            const double v8 = l2x * s8.value();
            if (raw[i] > 0.0)
                gs_disagreement_ = std::max(gs_disagreement_, std::abs(v8 / raw[i] - 1.0));
        }
        std::vector<double> mono(raw.size());
        double running = 0.0;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (running > 0.0 && raw[i] < running)
                raw_dip_ = std::max(raw_dip_, (running - raw[i]) / running);
            running = std::max(running, raw[i]);
            mono[i] = running;
        }
        inversion_stable_ = raw_dip_ <= 1e-4 && mono.front() > 0.0;
        if (!inversion_stable_) {
            substituted_ = true;
            for (std::size_t i = 0; i < mono.size(); ++i) mono[i] = surrogate(grid_[i]);
            running = 0.0;
            for (double& v : mono) running = v = std::max(running, v);
        }
        table_ = LogLogInterp(grid_, mono);

        // strictly increasing subsequence backs the inverse
        std::vector<double> xs, vs;
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            if (vs.empty() || mono[i] > vs.back() * (1.0 + 1e-14)) {
                xs.push_back(grid_[i]);
                vs.push_back(mono[i]);
            }
        }
        inverse_ = LogLogInterp(vs, xs);

        // centered finite differences on the log grid
        std::vector<double> dp(grid_.size());
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            const std::size_t lo = i == 0 ? 0 : i - 1;
            const std::size_t hi = i + 1 == grid_.size() ? i : i + 1;
            double d = (mono[hi] - mono[lo]) / (grid_[hi] - grid_[lo]);
            d = std::max(d, 1e-12 * mono[i] / grid_[i]);
            dp[i] = d;
        }
        prime_ = LogLogInterp(grid_, dp);
    }

    SymbolEvaluator sym_;
    std::vector<double> grid_;
    LogLogInterp table_, inverse_, prime_;
    double gs_disagreement_ = 0.0, raw_dip_ = 0.0;
    bool inversion_stable_ = true, substituted_ = false;
};

// ---------------------------------------------------------------------------
// Comparability checks

// band of (1/V^2(r)) / psi(1/r) over a grid of radii
struct VpsiBand {
    double c1 = INF, c2 = 0.0;
    double r_at_c1 = 0.0, r_at_c2 = 0.0;
    std::size_t n_points = 0;
};

inline VpsiBand check_Vpsi(const RenewalFunction& rf, const std::vector<double>& grid) {
    VpsiBand band;
    for (double r : grid) {
        const double v = rf.V(r);
        if (!(v > 0.0)) continue;
        const double ratio = 1.0 / (v * v * rf.symbol().psi(1.0 / r));
        if (ratio < band.c1) { band.c1 = ratio; band.r_at_c1 = r; }
        if (ratio > band.c2) { band.c2 = ratio; band.r_at_c2 = r; }
        ++band.n_points;
    }
    if (band.n_points == 0) throw config_error("check_Vpsi: empty grid");
    return band;
}

// largest c1 with V_inv(eta om) >= c1 eta^{2/alpha_lower} V_inv(om) on the grid
struct VScaling {
    double c1 = INF;
    double eta_at_min = 0.0, omega_at_min = 0.0;
    double exponent = 0.0; // 2/alpha_lower actually used
};

inline VScaling check_V_scaling(const RenewalFunction& rf, double alpha_lower,
                                const std::vector<double>& etas,
                                const std::vector<double>& omegas) {
    VScaling out;
    out.exponent = 2.0 / alpha_lower;
    for (double eta : etas) {
        if (!(eta > 0.0) || eta > 1.0) throw config_error("check_V_scaling: eta in (0,1]");
        for (double om : omegas) {
            const double lhs = rf.V_inv(eta * om);
            const double rhs = std::pow(eta, out.exponent) * rf.V_inv(om);
            const double c = lhs / rhs;
            if (c < out.c1) { out.c1 = c; out.eta_at_min = eta; out.omega_at_min = om; }
        }
    }
    return out;
}

// condition (H): smallest constant with V(z)-V(y) <= H_R V'(x)(z-y) over
// 0 < x <= y <= z <= 5x, x <= R; never reported below 1
struct HEstimate {
    double H = 1.0;
    double x_at_max = 0.0, y_at_max = 0.0, z_at_max = 0.0;
    std::size_t excluded = 0; // grid nodes dropped for vanishing V'
};

inline HEstimate estimate_H(const RenewalFunction& rf, double R) {
    if (!(R > 0.0)) throw config_error("estimate_H: R must be positive");
    HEstimate out;
    for (double x : log_grid(1e-3 * R, R, 50)) {
        const double vpx = rf.V_prime(x);
        if (!(vpx > 0.0) || !std::isfinite(vpx)) {
            ++out.excluded;
            continue;
        }
        for (double y : lin_grid(x, 5.0 * x, 30)) {
            const std::vector<double> zs =
                y < 5.0 * x * (1.0 - 1e-14) ? lin_grid(y, 5.0 * x, 30) : std::vector<double>{y};
            for (double z : zs) {
                const double ratio = (z - y <= 1e-9 * x)
                                         ? rf.V_prime(y) / vpx
                                         : (rf.V(z) - rf.V(y)) / (vpx * (z - y));
                if (ratio > out.H) {
                    out.H = ratio;
                    out.x_at_max = x;
                    out.y_at_max = y;
                    out.z_at_max = z;
                }
            }
        }
    }
    out.H = std::max(1.0, out.H);
    return out;
}

} // namespace levyhk

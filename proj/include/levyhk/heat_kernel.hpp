#pragma once

// Free (whole-space) transition density of the process, recovered from the
// symbol by radial Fourier inversion in dimension m:
//
//   p_t(r) = (2 pi)^{-m/2} r^{1-m/2} Int_0^inf e^{-t psi(s)} J_{m/2-1}(r s) s^{m/2} ds,
//
// with the non-oscillatory limit formula at r = 0.  The exact radial
// derivative comes from the dimension lift d/dr p = -2 pi r p^(d+2), the mass
// of a centered ball from the first Bessel antiderivative.  On top of the
// evaluators: grid certificates for the two-sided density bounds, the gradient
// bounds, the reflection-difference bound and the small-scale jump density
// comparison, each reported as an empirical ratio band over standardized
// (t, r) grids, plus a cached table for the many-evaluation consumers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bessel.hpp"
#include "common.hpp"
#include "model.hpp"
#include "quadrature.hpp"
#include "renewal.hpp"

namespace levyhk {

struct HankelOptions {
    double cutoff_exponent = 40.0; // integrate while t psi(s) <= this
    double rel_tol = 1e-11;
    std::size_t direct_cap = 30000;
};

class FreeKernel {
public:
    explicit FreeKernel(SymbolEvaluator sym, HankelOptions opt = {})
        : sym_(std::move(sym)), opt_(opt) {}

    const SymbolEvaluator& symbol() const { return sym_; }
    const ModelSpec& spec() const { return sym_.spec(); }
    int dim() const { return sym_.spec().d; }

    // upper integration limit; the discarded tail weighs at most e^{-cutoff}
    double tail_cut(double t) const {
        if (!(t > 0.0)) throw std::invalid_argument("FreeKernel: t must be > 0");
        const double s = sym_.psi_inv(opt_.cutoff_exponent / t);
        if (!std::isfinite(s))
            throw numeric_error("FreeKernel: cutoff unreachable, sup psi below " +
                                std::to_string(opt_.cutoff_exponent / t) +
                                " at t=" + std::to_string(t));
        return s;
    }

    // radial transition density in dimension m (the derivative lift uses d + 2)
    double p(int m, double t, double r) const {
        if (m < 1 || m > MAX_DIM + 2)
            throw std::invalid_argument("FreeKernel: dimension out of range");
        if (r < 0.0) throw std::invalid_argument("FreeKernel: r must be >= 0");
        if (r == 0.0) return p0(m, t);
        // deep in the tail the inversion loses the value to cancellation, but
        // for an exact power-law symbol the Mellin tail series takes over
        if (const double a = power_alpha(); a > 0.0) {
            const double lrho = std::log(r) - std::log(t) / a;
            if ((double(m) + a) * lrho > std::log(1e5)) {
                double rel = INF;
                const double v = tail_series(m, a, t, r, &rel);
                if (rel < 1e-9) return v;
            }
        }
        const double integral = invert(m, t, r);
        return std::pow(2.0 * PI, -0.5 * m) * std::pow(r, 1.0 - 0.5 * m) * integral;
    }

    // p_t(r) = sum_k (-1)^{k+1} t^k 2^{ak} G((m+ak)/2) G(1+ak/2) sin(pi a k/2)
    //                 / (k! pi^{m/2+1}) r^{-m-ak},   psi(s) = s^a
    // convergent for a <= 1, asymptotic otherwise; *rel reports the bound from
    // the first omitted (or smallest reached) term
    double tail_series(int m, double a, double t, double r, double* rel) const {
        const double lt = std::log(t), lr = std::log(r);
        const double lpi = std::log(PI);
        KahanSum sum;
        double min_term = INF, prev = INF;
        double tail_bound = INF;
        for (int k = 1; k <= 120; ++k) {
            // sin(pi a k / 2) with exact zeros at integer arguments
            const double z = 0.5 * a * double(k);
            const double frac = z - std::nearbyint(z);
            const double s = (std::llround(std::nearbyint(z)) % 2 ? -1.0 : 1.0) *
                             std::sin(PI * frac);
            double term = 0.0;
            if (s != 0.0) {
                const double lmag = double(k) * (lt + a * M_LN2) +
                                    std::lgamma(0.5 * (double(m) + a * double(k))) +
                                    std::lgamma(1.0 + 0.5 * a * double(k)) +
                                    std::log(std::abs(s)) -
                                    std::lgamma(double(k) + 1.0) -
                                    (0.5 * double(m) + 1.0) * lpi -
                                    (double(m) + a * double(k)) * lr;
                term = (k % 2 ? 1.0 : -1.0) * (s > 0.0 ? 1.0 : -1.0) * std::exp(lmag);
            }
            const double mag = std::abs(term);
            if (mag == 0.0) continue; // sin node: skip, it says nothing about decay
            if (mag > prev && prev < INF) {
                tail_bound = mag; // asymptotic regime: stop at the valley
                break;
            }
            prev = mag;
            min_term = std::min(min_term, mag);
            sum.add(term);
            if (mag <= 1e-12 * std::abs(sum.value())) {
                tail_bound = mag;
                break;
            }
        }
        if (tail_bound == INF) tail_bound = min_term;
        const double v = sum.value();
        *rel = std::abs(v) > 0.0 ? tail_bound / std::abs(v) : INF;
        return v;
    }

    double p0(int m, double t) const {
        if (m < 1 || m > MAX_DIM + 2)
            throw std::invalid_argument("FreeKernel: dimension out of range");
        const double cut = tail_cut(t);
        auto f = [&](double s) {
            return std::exp(-t * sym_.psi(s)) * std::pow(s, double(m) - 1.0);
        };
        const QuadResult q = adaptive_gk(f, 0.0, cut, opt_.rel_tol, 0.0, 6000);
        if (!q.converged)
            throw numeric_error("FreeKernel: p0 quadrature stalled at t=" + std::to_string(t));
        return std::pow(2.0 * PI, -double(m)) * sphere_area(m) * q.value;
    }

    double density(double t, double r) const { return p(dim(), t, r); }

    // exact radial derivative via the dimension lift
    double dp_dr(double t, double r) const {
        if (!(r > 0.0)) throw std::invalid_argument("FreeKernel: dp_dr needs r > 0");
        return -2.0 * PI * r * p(dim() + 2, t, r);
    }

    // P(|X_t| <= R) through the first Bessel antiderivative:
    //   2^{1-d/2} R^{d/2} / Gamma(d/2) Int_0^inf e^{-t psi(s)} s^{d/2-1} J_{d/2}(R s) ds
    double mass_in_ball(double t, double R) const {
        if (!(R > 0.0)) throw std::invalid_argument("FreeKernel: R must be > 0");
        const int d = dim();
        const double cut = tail_cut(t);
        auto f = [&](double s) {
            return std::exp(-t * sym_.psi(s)) * std::pow(s, 0.5 * d - 1.0);
        };
        const double integral = run_oscillatory(f, 0.5 * d, R, cut, 1.005,
                                                "mass t=" + std::to_string(t) +
                                                " R=" + std::to_string(R));
        return std::pow(2.0, 1.0 - 0.5 * d) * std::pow(R, 0.5 * d) /
               std::tgamma(0.5 * d) * integral;
    }

private:
    // exponent when the symbol is exactly a power, 0 otherwise
    double power_alpha() const {
        const ModelSpec& s = sym_.spec();
        if (s.family == Family::Stable || s.family == Family::SubordinateBM)
            return s.alpha;
        return 0.0;
    }

    double invert(int m, double t, double r) const {
        const double cut = tail_cut(t);
        auto f = [&](double s) {
            return std::exp(-t * sym_.psi(s)) * std::pow(s, 0.5 * m);
        };
        // the envelope crests mid-axis, so the first pass demands net decay
        // across the window before extrapolating
        return run_oscillatory(f, 0.5 * m - 1.0, r, cut, 0.995,
                               "p m=" + std::to_string(m) + " t=" + std::to_string(t) +
                               " r=" + std::to_string(r));
    }

    template <class F>
    double run_oscillatory(F&& f, double nu_j, double w, double cut,
                           double first_slack, const std::string& what) const {
        OscOptions osc;
        osc.rel_tol = opt_.rel_tol;
        osc.direct_cap = opt_.direct_cap;
        osc.growth_slack = first_slack;
        for (int attempt = 0; attempt < 2; ++attempt) {
            try {
                const OscResult q = integrate_oscillatory(f, nu_j, w, 0.0, cut, osc);
                if (q.converged) return q.value;
            } catch (const numeric_error&) {
            }
            // slow post-crest decay: extrapolate once any crest is far behind
            osc.growth_slack = 1.01;
            osc.accel_after = 512;
            osc.direct_cap = 200000;
        }
        throw numeric_error("FreeKernel: inversion did not stabilize (" + what + ")");
    }

    SymbolEvaluator sym_;
    HankelOptions opt_;
};

// ---------------------------------------------------------------------------
// empirical ratio bands over (t, r) grids

struct RatioBand {
    double lo = INF, hi = -INF;
    double t_lo = 0.0, r_lo = 0.0, t_hi = 0.0, r_hi = 0.0;
    std::size_t n = 0;

    void update(double ratio, double t, double r) {
        if (!std::isfinite(ratio))
            throw numeric_error("RatioBand: non-finite ratio at t=" + std::to_string(t) +
                                " r=" + std::to_string(r));
        if (ratio < lo) { lo = ratio; t_lo = t; r_lo = r; }
        if (ratio > hi) { hi = ratio; t_hi = t; r_hi = r; }
        ++n;
    }
    double spread() const { return hi / lo; }
};

inline std::vector<double> kernel_time_grid() { return log_grid(1e-2, 1.0, 9); }
inline std::vector<double> kernel_radius_grid(double R = 1.0) {
    return log_grid(1e-2, R, 17);
}

// p_t(r) / min(p_t(0), t/(V^2(r) r^d)); the band must stay finite, hi is the
// upper-bound constant
inline RatioBand check_upper(const FreeKernel& k, const RenewalFunction& rf,
                             const std::vector<double>& ts = kernel_time_grid(),
                             const std::vector<double>& rs = kernel_radius_grid()) {
    const int d = k.dim();
    RatioBand band;
    for (double t : ts) {
        const double center = k.p0(d, t);
        for (double r : rs) {
            const double v = rf.V(r);
            const double bound = std::min(center, t / (v * v * std::pow(r, d)));
            band.update(k.p(d, t, r) / bound, t, r);
        }
    }
    return band;
}

struct LowerBoundFit {
    double c = 0.0;  // largest coefficient validated on the grid
    double c1 = 0.0; // exponential rate it was achieved at
    std::size_t n = 0;
};

// best c with p_t(r) >= c t nu(r) exp(-c1 t / V^2(r)), c1 scanned over {1,2,4,8}
inline LowerBoundFit check_lower(const FreeKernel& k, const LevyDensity& nu,
                                 const RenewalFunction& rf,
                                 const std::vector<double>& ts = kernel_time_grid(),
                                 const std::vector<double>& rs = kernel_radius_grid()) {
    const int d = k.dim();
    std::vector<double> pv, base, expo;
    for (double t : ts) {
        for (double r : rs) {
            pv.push_back(k.p(d, t, r));
            base.push_back(t * nu(r));
            const double v = rf.V(r);
            expo.push_back(t / (v * v));
        }
    }
    LowerBoundFit best;
    for (double c1 : {1.0, 2.0, 4.0, 8.0}) {
        double c = INF;
        for (std::size_t i = 0; i < pv.size(); ++i)
            c = std::min(c, pv[i] / (base[i] * std::exp(-c1 * expo[i])));
        if (c > best.c) {
            best.c = c;
            best.c1 = c1;
        }
    }
    best.n = pv.size();
    return best;
}

// p_t(r) / min([V^{-1}(sqrt t)]^{-d}, t/(V^2(r) r^d)): two-sided comparability
inline RatioBand check_comparability(const FreeKernel& k, const RenewalFunction& rf,
                                     const std::vector<double>& ts = kernel_time_grid(),
                                     const std::vector<double>& rs = kernel_radius_grid()) {
    const int d = k.dim();
    RatioBand band;
    for (double t : ts) {
        const double central = std::pow(rf.V_inv(std::sqrt(t)), -double(d));
        for (double r : rs) {
            const double v = rf.V(r);
            const double bound = std::min(central, t / (v * v * std::pow(r, d)));
            band.update(k.p(d, t, r) / bound, t, r);
        }
    }
    return band;
}

struct GradBands {
    RatioBand small_r; // r <  V^{-1}(sqrt t): |p'| / (r [V^{-1}(sqrt t)]^{-d-2})
    RatioBand large_r; // r >= V^{-1}(sqrt t): |p'| / (t / (V^2(r) r^{d+1}))
};

inline GradBands check_grad_comparability(const FreeKernel& k, const RenewalFunction& rf,
                                          const std::vector<double>& ts = kernel_time_grid(),
                                          const std::vector<double>& rs = kernel_radius_grid()) {
    const int d = k.dim();
    GradBands out;
    for (double t : ts) {
        const double vi = rf.V_inv(std::sqrt(t));
        for (double r : rs) {
            const double g = std::abs(k.dp_dr(t, r));
            if (r < vi) {
                out.small_r.update(g / (r * std::pow(vi, -double(d) - 2.0)), t, r);
            } else {
                const double v = rf.V(r);
                out.large_r.update(g / (t / (v * v * std::pow(r, d + 1.0))), t, r);
            }
        }
    }
    return out;
}

// |p'_t(r)| relative to p_t(r) min(1/r, 1/V^{-1}(sqrt t)); hi is the constant
inline RatioBand check_derestimate(const FreeKernel& k, const RenewalFunction& rf,
                                   const std::vector<double>& ts = kernel_time_grid(),
                                   const std::vector<double>& rs = kernel_radius_grid(2.0)) {
    RatioBand band;
    for (double t : ts) {
        const double vi = rf.V_inv(std::sqrt(t));
        for (double r : rs) {
            const double g = std::abs(k.dp_dr(t, r));
            band.update(g * std::max(r, vi) / k.p(k.dim(), t, r), t, r);
        }
    }
    return band;
}

// difference across the reflection in {x_1 = 0}; nonnegative on the half-space
inline double diff_free(const FreeKernel& k, double t, const Point& x, const Point& y) {
    if (x.d != k.dim() || y.d != k.dim())
        throw std::invalid_argument("diff_free: dimension mismatch");
    const double r1 = (x - y).norm();
    const double r2 = (reflect_first(x) - y).norm();
    return k.p(k.dim(), t, r1) - k.p(k.dim(), t, r2);
}

// difference bound certificate: sup over half-space pairs inside the unit ball
// of (p_t(|x-y|) - p_t(|x^-y|)) / (|x^-x| min(p/|x-y|, p/V^{-1}(sqrt t)))
inline RatioBand check_lem1(const FreeKernel& k, const RenewalFunction& rf,
                            const std::vector<double>& ts = {0.05, 0.5},
                            const std::vector<double>& x1s = {0.05, 0.2},
                            const std::vector<double>& dists = log_grid(0.1, 1.0, 5)) {
    const int d = k.dim();
    RatioBand band;
    for (double t : ts) {
        const double vi = rf.V_inv(std::sqrt(t));
        for (double x1 : x1s) {
            const Point x = axis_point(d, x1);
            for (double dist : dists) {
                std::vector<Point> ys;
                {
                    Point y = x;
                    y[0] += dist;
                    ys.push_back(y);
                }
                if (x1 - dist > 1e-12) {
                    Point y = x;
                    y[0] -= dist;
                    ys.push_back(y);
                }
                if (d >= 2) {
                    Point y = x;
                    y[1] += dist;
                    ys.push_back(y);
                    Point z = x;
                    z[0] += dist / std::sqrt(2.0);
                    z[1] += dist / std::sqrt(2.0);
                    ys.push_back(z);
                }
                for (const Point& y : ys) {
                    if (y.norm() >= 1.0) continue; // the bound is for the unit ball
                    const double r1 = (x - y).norm();
                    const double pv = k.p(d, t, r1);
                    const double denom = 2.0 * x1 * pv / std::max(r1, vi);
                    band.update(diff_free(k, t, x, y) / denom, t, r1);
                }
            }
        }
    }
    if (band.n == 0) throw config_error("check_lem1: empty grid");
    return band;
}

// p_t(0) [V^{-1}(sqrt t)]^d over t; hi is the on-diagonal upper-bound constant
inline RatioBand check_p0(const FreeKernel& k, const RenewalFunction& rf,
                          const std::vector<double>& ts = kernel_time_grid()) {
    RatioBand band;
    for (double t : ts)
        band.update(k.p0(k.dim(), t) * std::pow(rf.V_inv(std::sqrt(t)), k.dim()), t, 0.0);
    return band;
}

struct NuBands {
    RatioBand scale;       // nu(r) V^2(r) r^d
    double doubling = 0.0; // sup nu(r) / nu(2r)
};

// jump density against its V-scale comparison plus the doubling ratio
inline NuBands check_nuestimates(const LevyDensity& nu, const RenewalFunction& rf,
                                 const std::vector<double>& rs = kernel_radius_grid()) {
    const int d = nu.spec().d;
    NuBands out;
    for (double r : rs) {
        const double v = rf.V(r);
        out.scale.update(nu(r) * v * v * std::pow(r, d), 0.0, r);
        out.doubling = std::max(out.doubling, nu(r) / nu(2.0 * r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// cached density over a (t, r) window: bilinear interpolation of log p on a
// log-log grid, a quadratic blend against p_t(0) below the first radius node,
// and the far-field closure p ~ rho(t) t nu(r) beyond the last one

class DensityTable {
public:
    DensityTable(const FreeKernel& k, const LevyDensity& nu, double t_lo, double t_hi,
                 double r_lo, double r_hi, std::size_t nt = 48, std::size_t nr = 120)
        : nu_(nu) {
        if (!(t_lo > 0.0) || !(t_hi > t_lo) || !(r_lo > 0.0) || !(r_hi > r_lo) ||
            nt < 2 || nr < 2)
            throw std::invalid_argument("DensityTable: bad window");
        ts_ = log_grid(t_lo, t_hi, nt);
        rs_ = log_grid(r_lo, r_hi, nr);
        for (double t : ts_) lts_.push_back(std::log(t));
        for (double r : rs_) lrs_.push_back(std::log(r));
        const int d = k.dim();
        logp_.resize(nt * nr);
        logp0_.resize(nt);
        logrho_.resize(nt);
        for (std::size_t i = 0; i < nt; ++i) {
            const double p0 = std::max(k.p0(d, ts_[i]), 1e-300);
            logp0_[i] = std::log(p0);
            for (std::size_t j = 0; j < nr; ++j) {
                // nodes this far under the peak sit deep in the tail, where the
                // closure p ~ t nu(r) governs; skip the slow inversion there
                const double fb = ts_[i] * nu_(rs_[j]);
                double p;
                if (fb < 1e-6 * p0) {
                    p = fb;
                } else {
                    try {
                        p = k.p(d, ts_[i], rs_[j]);
                    } catch (const numeric_error&) {
                        if (!(fb < 1e-4 * p0)) throw;
                        p = fb;
                    }
                }
                logp_[i * nr + j] = std::log(std::max(p, 1e-300));
            }
            const double edge = std::exp(logp_[i * nr + nr - 1]);
            logrho_[i] = std::log(std::max(edge / (ts_[i] * nu_(rs_.back())), 1e-300));
        }
    }

    double operator()(double t, double r) const {
        if (!(t >= ts_.front() && t <= ts_.back()))
            throw std::out_of_range("DensityTable: t outside window");
        const double lt = std::log(t);
        if (r >= rs_.back())
            return std::exp(interp_row(logrho_, lt)) * t * nu_(r);
        if (r <= rs_.front()) {
            const double p0 = std::exp(interp_row(logp0_, lt));
            if (r <= 0.0) return p0;
            const double pe = std::exp(interp_cell(lt, lrs_.front()));
            const double q = r / rs_.front();
            return p0 + (pe - p0) * q * q;
        }
        return std::exp(interp_cell(lt, std::log(r)));
    }

    const std::vector<double>& time_nodes() const { return ts_; }
    const std::vector<double>& radius_nodes() const { return rs_; }

private:
    static std::pair<std::size_t, double> locate(const std::vector<double>& g, double x) {
        auto it = std::upper_bound(g.begin(), g.end(), x);
        std::size_t i = it == g.begin() ? 0 : std::size_t(it - g.begin()) - 1;
        if (i > g.size() - 2) i = g.size() - 2;
        double u = (x - g[i]) / (g[i + 1] - g[i]);
        u = std::min(1.0, std::max(0.0, u));
        return {i, u};
    }

    double interp_row(const std::vector<double>& a, double lt) const {
        const auto [i, u] = locate(lts_, lt);
        return a[i] * (1.0 - u) + a[i + 1] * u;
    }

    double interp_cell(double lt, double lr) const {
        const auto [i, u] = locate(lts_, lt);
        const auto [j, v] = locate(lrs_, lr);
        const std::size_t nr = lrs_.size();
        const double a = logp_[i * nr + j] * (1.0 - v) + logp_[i * nr + j + 1] * v;
        const double b = logp_[(i + 1) * nr + j] * (1.0 - v) + logp_[(i + 1) * nr + j + 1] * v;
        return a * (1.0 - u) + b * u;
    }

    LevyDensity nu_;
    std::vector<double> ts_, rs_, lts_, lrs_;
    std::vector<double> logp_, logp0_, logrho_;
};

// ---------------------------------------------------------------------------

// matrix CSV: header row carries the r nodes, first column the t nodes
template <class F>
void write_grid_csv(std::ostream& os, const std::vector<double>& ts,
                    const std::vector<double>& rs, F&& f,
                    const std::string& corner = "t_r") {
    os << std::setprecision(17);
    os << corner;
    for (double r : rs) os << ',' << r;
    os << '\n';
    for (double t : ts) {
        os << t;
        for (double r : rs) os << ',' << f(t, r);
        os << '\n';
    }
}

} // namespace levyhk

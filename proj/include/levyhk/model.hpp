#pragma once

// Model catalog: isotropic pure-jump unimodal families with their symbols and
// radial jump densities.
//
//   stable          psi(s) = s^alpha,  nu(r) = A(d,alpha) r^{-d-alpha}
//   relativistic    psi(s) = sqrt(s^2+m^2) - m, nu via Macdonald K_{(d+1)/2}
//   subordinate_bm  psi(s) = phi(s^2), phi(l) = l^{alpha/2} ell(l); nu evaluated
//                   through the subordination integral (independent route that
//                   must agree with the stable closed form when ell == 1)
//   trunc_stable    nu(r) = A r^{-d-alpha} on (0,1], c1 e^{-c2 r} beyond, with
//                   c1 = A e^{d+alpha}, c2 = d+alpha (C^1 match at r = 1);
//                   psi assembled by quadrature and cached on a log grid
//
// psi_star is the running maximum of psi (grid evidence, refined until stable);
// psi_inv is the generalized inverse  inf{ y >= 0 : psi_star(y) >= u }.

#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "quadrature.hpp"

namespace levyhk {

enum class Family { Stable, Relativistic, SubordinateBM, TruncStableExp };

inline std::string family_name(Family f) {
    switch (f) {
        case Family::Stable: return "stable";
        case Family::Relativistic: return "relativistic";
        case Family::SubordinateBM: return "subordinate_bm";
        case Family::TruncStableExp: return "trunc_stable";
    }
    return "?";
}

inline Family family_from_name(const std::string& s) {
    if (s == "stable") return Family::Stable;
    if (s == "relativistic") return Family::Relativistic;
    if (s == "subordinate_bm") return Family::SubordinateBM;
    if (s == "trunc_stable") return Family::TruncStableExp;
    throw config_error("unknown family: " + s);
}

struct ModelSpec {
    Family family = Family::Stable;
    int d = 1;
    double alpha = 1.0;      // stability index, in (0,2)
    double m = 1.0;          // mass parameter (relativistic)
    std::string sv_factor = "one"; // slowly varying factor for subordinate_bm

    void validate() const {
        if (d < 1) throw config_error("model: d must be >= 1");
        const bool uses_alpha = family != Family::Relativistic;
        if (uses_alpha && !(alpha > 0.0 && alpha < 2.0))
            throw config_error("model: alpha must lie in (0,2)");
        if (family == Family::Relativistic && !(m > 0.0))
            throw config_error("model: m must be > 0");
        if (family == Family::SubordinateBM && sv_factor != "one")
            throw config_error("model: unsupported slowly varying factor '" + sv_factor +
                               "' (built-in choices: one)");
    }

    std::string id() const {
        std::ostringstream os;
        os << family_name(family) << "-d" << d;
        if (family == Family::Relativistic)
            os << "-m" << m;
        else
            os << "-a" << alpha;
        return os.str();
    }
};

// radial coefficient of the stable density: nu(r) = A r^{-d-alpha}
inline double stable_density_coeff(int d, double alpha) {
    // 2^alpha Gamma((d+alpha)/2) / (pi^{d/2} |Gamma(-alpha/2)|), with
    // |Gamma(-alpha/2)| = 2 Gamma(1-alpha/2)/alpha
    return std::pow(2.0, alpha - 1.0) * alpha * std::tgamma(0.5 * (d + alpha)) /
           (std::pow(PI, 0.5 * d) * std::tgamma(1.0 - 0.5 * alpha));
}

// -------------------------------------------------------------------------
// spherical average of cos<x, e_1 t>:  Lambda_d(x) = Gamma(d/2) (2/x)^{d/2-1} J_{d/2-1}(x)

inline double one_minus_lambda(int d, double x) {
    if (x < 0) x = -x;
    if (x < 0.5) {
        // 1 - Lambda = sum_{m>=1} (-1)^{m+1} (x^2/4)^m Gamma(d/2) / (m! Gamma(m+d/2))
        const double q = 0.25 * x * x;
        double term = q / (0.5 * d); // m = 1
        KahanSum s;
        s.add(term);
        for (int m = 2; m < 30; ++m) {
            term *= -q / (double(m) * (0.5 * d + m - 1.0));
            s.add(term);
            if (std::abs(term) < 1e-18) break;
        }
        return s.value();
    }
    if (d == 1) return 1.0 - std::cos(x);
    const double nu = 0.5 * d - 1.0;
    const double lam = std::tgamma(0.5 * d) * std::pow(2.0 / x, nu) * besselj(nu, x);
    return 1.0 - lam;
}

// -------------------------------------------------------------------------

class SymbolEvaluator;

namespace detail {

// symbol of the truncated family by quadrature, assembled from
//   P(s) = omega A Int_0^1 (1-Lambda(s r)) r^{-1-alpha} dr
//   E(s) = omega c1 Int_1^inf (1-Lambda(s r)) e^{-c2 r} r^{d-1} dr
// directly for s <= 1, and through the stable normalization
//   Int_0^inf (1-Lambda(u)) u^{-1-alpha} du = 1/(omega A)
// plus oscillatory tail integrals for s > 1.
class TruncSymbol {
public:
    TruncSymbol(int d, double alpha)
        : d_(d), alpha_(alpha), A_(stable_density_coeff(d, alpha)),
          omega_(sphere_area(d)), c2_(d + alpha), c1_(A_ * std::exp(double(d) + alpha)) {
        rho_cut_ = 1.0 + 90.0 / c2_;
        exp_total_ = adaptive_gk([this](double r) { return std::exp(-c2_ * r) * std::pow(r, d_ - 1.0); },
                                 1.0, rho_cut_, 1e-13).value;
        build_table();
    }

    double value(double s) const {
        if (s <= 0.0) return 0.0;
        return table_(s);
    }

    double log_value(double s) const { return table_.log_value(s); }

    double value_exact(double s) const { // un-interpolated; used by the table and tests
        if (s <= 0.0) return 0.0;
        return (s <= 1.0) ? direct(s) : via_tail(s);
    }

    // both assembly routes are public so they can be cross-validated on overlap
    double direct(double s) const {
        const double p = tanh_sinh([this, s](double rho) {
                             return one_minus_lambda(d_, s * rho) * std::pow(rho, -1.0 - alpha_);
                         }, 0.0, 1.0, 1e-12).value;
        const double e = adaptive_gk([this, s](double rho) {
                             return one_minus_lambda(d_, s * rho) * std::exp(-c2_ * rho) *
                                    std::pow(rho, d_ - 1.0);
                         }, 1.0, rho_cut_, 1e-12).value;
        return omega_ * (A_ * p + c1_ * e);
    }

    double via_tail(double s) const { // valid once s is past the cancellation region

        const double nu = 0.5 * d_ - 1.0;
        const double gfac = std::tgamma(0.5 * d_) * std::pow(2.0, nu);
        OscOptions opt;
        opt.direct_cap = 96;
        opt.accel_terms = 48;
        // L(s) = Int_s^inf Lambda_d(u) u^{-1-alpha} du
        const double L = integrate_oscillatory(
            [this, gfac, nu](double u) { return gfac * std::pow(u, -1.0 - alpha_ - nu); },
            nu, 1.0, s, s + 600.0 * PI, opt).value;
        const double T = std::pow(s, -alpha_) / alpha_ - L;
        const double P = std::pow(s, alpha_) * (1.0 - omega_ * A_ * T);
        // oscillatory part of E(s)
        const double osc = integrate_oscillatory(
            [this, gfac, nu, s](double rho) {
                return gfac * std::pow(s * rho, -nu) * std::exp(-c2_ * rho) * std::pow(rho, d_ - 1.0);
            },
            nu, s, 1.0, rho_cut_ + 600.0 * PI / s, opt).value;
        const double E = omega_ * c1_ * (exp_total_ - osc);
        return P + E;
    }

private:
    void build_table() {
        const auto grid = log_grid(1e-8, 1e10, 721);
        std::vector<double> vals(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = value_exact(grid[i]);
        table_ = LogLogInterp(grid, vals);
    }

    int d_;
    double alpha_, A_, omega_, c2_, c1_, rho_cut_, exp_total_ = 0.0;
    LogLogInterp table_;
};

} // namespace detail

// -------------------------------------------------------------------------

class SymbolEvaluator {
public:
    explicit SymbolEvaluator(ModelSpec spec) : spec_(spec) {
        spec_.validate();
        if (spec_.family == Family::TruncStableExp)
            trunc_ = std::make_shared<detail::TruncSymbol>(spec_.d, spec_.alpha);
        build_envelope();
    }

    const ModelSpec& spec() const { return spec_; }

    double psi(double s) const {
        s = std::abs(s);
        switch (spec_.family) {
            case Family::Stable:
                return std::pow(s, spec_.alpha);
            case Family::Relativistic:
                // sqrt(s^2+m^2) - m without cancellation
                return s * s / (std::sqrt(s * s + spec_.m * spec_.m) + spec_.m);
            case Family::SubordinateBM:
                return phi(s * s);
            case Family::TruncStableExp:
                return trunc_->value(s);
        }
        return 0.0;
    }

    // log psi, finite across the whole positive double range of s (psi itself
    // can overflow where quadratures probe extreme arguments)
    double log_psi(double s) const {
        s = std::abs(s);
        switch (spec_.family) {
            case Family::Stable:
            case Family::SubordinateBM:
                return spec_.alpha * std::log(s);
            case Family::Relativistic: {
                const double q = spec_.m / s;
                return std::log(s) - std::log(std::hypot(1.0, q) + q);
            }
            case Family::TruncStableExp:
                return trunc_->log_value(s);
        }
        return -INF;
    }

    // Laplace exponent of the driving subordinator (subordinate_bm only)
    double phi(double lambda) const {
        return std::pow(lambda, 0.5 * spec_.alpha) * sv_ell(lambda);
    }
    double sv_ell(double) const { return 1.0; } // built-in choice "one"

    // running maximum sup_{[0,r]} psi, backed by the refined grid envelope
    double psi_star(double r) const {
        r = std::abs(r);
        if (r <= env_x_.front()) return psi(r);
        double m = 0.0;
        if (r >= env_x_.back()) {
            m = env_max_.back();
        } else {
            const auto it = std::upper_bound(env_x_.begin(), env_x_.end(), r);
            m = env_max_[std::size_t(it - env_x_.begin()) - 1];
        }
        return std::max(m, psi(r));
    }

    // generalized inverse: inf{ y >= 0 : psi_star(y) >= u }; +inf if unattained
    double psi_inv(double u) const {
        if (u <= 0.0) return 0.0;
        double lo = 0.0, hi = 1e-8;
        while (psi_star(hi) < u) {
            lo = hi;
            hi *= 4.0;
            if (hi > 1e30) return INF;
        }
        if (lo == 0.0) { // u attained below the initial probe; bracket downward
            double up = hi;
            while (up > 1e-290 && psi_star(up * 0.25) >= u) up *= 0.25;
            if (up <= 1e-290) return up; // at the numeric floor
            hi = up;
            lo = up * 0.25;
        }
        return bisect_log(lo, hi, u);
    }

private:
    double bisect_log(double lo, double hi, double u) const {
        for (int i = 0; i < 120; ++i) {
            const double mid = std::sqrt(lo * hi);
            if (psi_star(mid) >= u) hi = mid; else lo = mid;
            if (hi - lo <= 1e-14 * hi) break;
        }
        return hi;
    }

    void build_envelope() {
        // running maxima on a log grid, node count doubled until stable
        const double lo = 1e-8, hi = 1e10;
        std::size_t n = 257;
        std::vector<double> xs, mx;
        for (int pass = 0; pass < 6; ++pass) {
            std::vector<double> x2 = log_grid(lo, hi, n);
            std::vector<double> m2(n);
            double run = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                run = std::max(run, psi(x2[i]));
                m2[i] = run;
            }
            bool stable_pass = !xs.empty();
            if (!xs.empty()) {
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    const double a = mx[i], b = m2[2 * i];
                    if (std::abs(a - b) > 1e-9 * std::max(std::abs(a), std::abs(b))) {
                        stable_pass = false;
                        break;
                    }
                }
            }
            xs = std::move(x2);
            mx = std::move(m2);
            if (stable_pass) break;
            n = 2 * n - 1;
        }
        env_x_ = std::move(xs);
        env_max_ = std::move(mx);
    }

    ModelSpec spec_;
    std::shared_ptr<detail::TruncSymbol> trunc_;
    std::vector<double> env_x_, env_max_;
};

// -------------------------------------------------------------------------
// radial jump density

class LevyDensity {
public:
    explicit LevyDensity(ModelSpec spec) : spec_(spec) {
        spec_.validate();
        A_ = stable_density_coeff(spec_.d, spec_.alpha);
        omega_ = sphere_area(spec_.d);
        if (spec_.family == Family::TruncStableExp) {
            c2_ = spec_.d + spec_.alpha;
            c1_ = A_ * std::exp(c2_);
        }
    }

    const ModelSpec& spec() const { return spec_; }

    double operator()(double r) const {
        if (!(r > 0.0)) throw std::invalid_argument("LevyDensity: r must be > 0");
        switch (spec_.family) {
            case Family::Stable:
                return A_ * std::pow(r, -double(spec_.d) - spec_.alpha);
            case Family::Relativistic: {
                const int d = spec_.d;
                const double s = 0.5 * (d + 1.0);
                const double x = spec_.m * r;
                const auto K = macdonald_k(s, x);
                const double c = std::pow(2.0, 0.5 * (1.0 - d)) * std::pow(PI, -0.5 * (d + 1.0));
                return c * std::pow(spec_.m, d + 1.0) * std::pow(x, -s) * K.value;
            }
            case Family::SubordinateBM:
                return subordination_integral(r, 0.5 * (spec_.d + spec_.alpha));
            case Family::TruncStableExp:
                return r <= 1.0 ? A_ * std::pow(r, -double(spec_.d) - spec_.alpha)
                                : c1_ * std::exp(-c2_ * r);
        }
        return 0.0;
    }

    double prime(double r) const {
        if (!(r > 0.0)) throw std::invalid_argument("LevyDensity: r must be > 0");
        switch (spec_.family) {
            case Family::Stable:
                return -(spec_.d + spec_.alpha) * A_ * std::pow(r, -double(spec_.d) - spec_.alpha - 1.0);
            case Family::Relativistic: {
                const int d = spec_.d;
                const double s = 0.5 * (d + 1.0);
                const double x = spec_.m * r;
                const auto K = macdonald_k(s + 1.0, x);
                const double c = std::pow(2.0, 0.5 * (1.0 - d)) * std::pow(PI, -0.5 * (d + 1.0));
                return -c * std::pow(spec_.m, d + 2.0) * std::pow(x, -s) * K.value;
            }
            case Family::SubordinateBM:
                return -0.5 * r * subordination_integral(r, 0.5 * (spec_.d + spec_.alpha) + 1.0);
            case Family::TruncStableExp:
                return r <= 1.0
                           ? -(spec_.d + spec_.alpha) * A_ * std::pow(r, -double(spec_.d) - spec_.alpha - 1.0)
                           : -c2_ * c1_ * std::exp(-c2_ * r);
        }
        return 0.0;
    }

    // nu(B_rho^c) = omega Int_rho^inf nu(s) s^{d-1} ds
    double tail_mass(double rho) const {
        if (!(rho > 0.0)) throw std::invalid_argument("tail_mass: rho must be > 0");
        const int d = spec_.d;
        switch (spec_.family) {
            case Family::Stable:
                return omega_ * A_ * std::pow(rho, -spec_.alpha) / spec_.alpha;
            case Family::TruncStableExp: {
                const double from1 = omega_ * c1_ *
                    adaptive_gk([this, d](double s) { return std::exp(-c2_ * s) * std::pow(s, d - 1.0); },
                                1.0, 1.0 + 120.0 / c2_, 1e-12).value;
                if (rho >= 1.0)
                    return omega_ * c1_ *
                           adaptive_gk([this, d](double s) { return std::exp(-c2_ * s) * std::pow(s, d - 1.0); },
                                       rho, rho + 120.0 / c2_, 1e-12).value;
                return omega_ * A_ * (std::pow(rho, -spec_.alpha) - 1.0) / spec_.alpha + from1;
            }
            default: {
                // generic: integrate nu(s) s^{d-1} until it is negligible
                auto f = [this, d](double s) { return (*this)(s)*std::pow(s, d - 1.0); };
                const double f0 = f(rho);
                double hi = rho * 2.0;
                while (f(hi) > 1e-18 * f0 && hi < rho + 4000.0) hi = rho + (hi - rho) * 2.0;
                return omega_ * adaptive_gk(f, rho, hi, 1e-11).value;
            }
        }
    }

    // Int_{|x|<eps} |x|^2 nu(dx) = omega Int_0^eps s^{d+1} nu(s) ds
    double small_ball_second_moment(double eps) const {
        if (spec_.family == Family::Stable ||
            (spec_.family == Family::TruncStableExp && eps <= 1.0))
            return omega_ * A_ * std::pow(eps, 2.0 - spec_.alpha) / (2.0 - spec_.alpha);
        const int d = spec_.d;
        return omega_ * tanh_sinh([this, d](double s) { return (*this)(s)*std::pow(s, d + 1.0); },
                                  0.0, eps, 1e-11).value;
    }

    // grid evidence for the tail comparison  nu(r) <= a nu(r+1), r >= 1
    double tail_ratio_a() const {
        double sup = 1.0;
        for (double r : log_grid(1.0, 200.0, 120)) {
            const double num = (*this)(r);
            const double den = (*this)(r + 1.0);
            if (!(den > 0.0)) throw numeric_error("tail_ratio_a: vanishing density");
            sup = std::max(sup, num / den);
        }
        return 1.05 * sup;
    }

private:
    // Int_0^inf (4 pi u)^{-d/2} e^{-r^2/(4u)} mu(du) with u = e^v and
    // mu(du) = (alpha/2)/Gamma(1-alpha/2) u^{-1-alpha/2} du; q = (d+alpha)/2
    // (q+1 for the radial derivative kernel)
    double subordination_integral(double r, double q) const {
        const double calpha = 0.5 * spec_.alpha / std::tgamma(1.0 - 0.5 * spec_.alpha);
        const double pref = calpha * std::pow(4.0 * PI, -0.5 * spec_.d);
        const double vstar = std::log(r * r / (4.0 * q));
        auto H = [&](double v) { return -(r * r / 4.0) * std::exp(-v) - q * v; };
        const double Hs = H(vstar);
        const double wlo = -std::log(1.0 + 50.0 / q);
        const double whi = 50.0 / q + 3.0;
        const double integral = adaptive_gk([&](double v) { return std::exp(H(v) - Hs); },
                                            vstar + wlo, vstar + whi, 1e-12).value;
        return pref * std::exp(Hs) * integral;
    }

    ModelSpec spec_;
    double A_ = 0.0, omega_ = 0.0, c1_ = 0.0, c2_ = 0.0;
};

// -------------------------------------------------------------------------
// weak scaling certificate: grid evidence for
//   psi(l t) >= C_lower l^{a_lower} psi(t)  and  psi(l t) <= C_upper l^{a_upper} psi(t)
// over l in lambdas (>= 1), t in thetas (>= theta0)

struct ScalingCertificate {
    double alpha_lower = 0.0, alpha_upper = 0.0, theta0 = 0.0;
    double C_lower = 0.0, C_upper = 0.0;
    std::size_t n_points = 0;
    std::string grid_id;
};

inline ScalingCertificate estimate_scaling(const SymbolEvaluator& sym, double alpha_lower,
                                           double alpha_upper, double theta0,
                                           const std::vector<double>& lambdas,
                                           const std::vector<double>& thetas) {
    if (lambdas.empty() || thetas.empty())
        throw config_error("estimate_scaling: empty grid");
    ScalingCertificate c;
    c.alpha_lower = alpha_lower;
    c.alpha_upper = alpha_upper;
    c.theta0 = theta0;
    c.C_lower = INF;
    c.C_upper = 0.0;
    for (double th : thetas) {
        if (th < theta0) continue;
        const double base = sym.psi(th);
        if (!(base > 0.0)) throw numeric_error("estimate_scaling: psi(theta) not positive");
        for (double l : lambdas) {
            if (l < 1.0) continue;
            const double v = sym.psi(l * th);
            const double rlo = v / (std::pow(l, alpha_lower) * base);
            const double rhi = v / (std::pow(l, alpha_upper) * base);
            if (!std::isfinite(rlo) || !std::isfinite(rhi))
                throw numeric_error("estimate_scaling: non-finite ratio");
            c.C_lower = std::min(c.C_lower, rlo);
            c.C_upper = std::max(c.C_upper, rhi);
            ++c.n_points;
        }
    }
    if (c.n_points == 0) throw config_error("estimate_scaling: grid below theta0");
    std::ostringstream os;
    os << "lambda[" << lambdas.front() << "," << lambdas.back() << "]x" << lambdas.size()
       << "-theta[" << thetas.front() << "," << thetas.back() << "]x" << thetas.size();
    c.grid_id = os.str();
    return c;
}

// family defaults for the prescribed exponents
struct ScalingExponents {
    double lower, upper, theta0;
};

inline ScalingExponents default_scaling_exponents(const ModelSpec& spec) {
    switch (spec.family) {
        case Family::Stable:
        case Family::SubordinateBM:
            return {spec.alpha, spec.alpha, 1e-3};
        case Family::Relativistic:
            return {1.0, 1.0, 1.0};
        case Family::TruncStableExp:
            return {spec.alpha, spec.alpha, 1.0};
    }
    return {1.0, 1.0, 1.0};
}

inline ScalingCertificate estimate_scaling(const SymbolEvaluator& sym) {
    const auto e = default_scaling_exponents(sym.spec());
    return estimate_scaling(sym, e.lower, e.upper, e.theta0, log_grid(1.0, 100.0, 25),
                            log_grid(e.theta0, 100.0 * e.theta0, 25));
}

} // namespace levyhk

#pragma once

// Statistical checks of the Dirichlet-kernel estimates: two-sided bounds,
// gradient ratios, reflection-difference ratios, the exit-law identity, and
// the positivity constants.  Everything here consumes ExitEnsembles (built
// once per start point and reused across all (t, y) queries) together with
// the analytic free-kernel machinery.

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "domain.hpp"
#include "heat_kernel.hpp"
#include "model.hpp"
#include "renewal.hpp"
#include "simulate.hpp"

namespace levyhk {

struct ModelBundle {
    ModelSpec spec;
    SymbolEvaluator sym;
    LevyDensity nu;
    RenewalFunction V;
    FreeKernel kernel;

    explicit ModelBundle(const ModelSpec& s)
        : spec(s), sym(spec), nu(spec), V(sym), kernel(sym) {}
};

// min/median/max of a set of noisy values plus the widest 3-s.e. envelope
struct BandStat {
    double min = INF, max = -INF;
    double ci_lo = INF, ci_hi = -INF;
    std::size_t n = 0;

    void add(double value, double se) {
        min = std::min(min, value);
        max = std::max(max, value);
        ci_lo = std::min(ci_lo, value - 3.0 * se);
        ci_hi = std::max(ci_hi, value + 3.0 * se);
        values_.push_back(value);
        ++n;
    }
    double median() const { return values_.empty() ? 0.0 : median_of(values_); }
    bool positive() const { return n > 0 && ci_lo > 0.0; }
    bool bounded() const { return n > 0 && std::isfinite(ci_hi); }

private:
    mutable std::vector<double> values_;
};

namespace detail {

inline std::string fmt_grid(const char* name, const std::vector<double>& v) {
    std::ostringstream os;
    os << name << "[";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << "]";
    return os.str();
}

inline std::string fmt_points(const char* name, const std::vector<Point>& v) {
    std::ostringstream os;
    os << name << "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        os << (i ? ";" : "");
        for (int j = 0; j < v[i].d; ++j) os << (j ? "," : "") << v[i][j];
    }
    os << "]";
    return os.str();
}

// ensembles keyed by start point, built lazily and reused across queries
class EnsembleCache {
public:
    EnsembleCache(const JumpSampler& js, const Domain& D, double horizon,
                  const PathConfig& cfg)
        : js_(js), D_(D), horizon_(horizon), cfg_(cfg) {}

    const ExitEnsemble& at(const Point& x) {
        std::array<double, MAX_DIM + 1> key{};
        for (int i = 0; i < x.d; ++i) key[std::size_t(i)] = x[i];
        key[MAX_DIM] = double(x.d);
        auto it = store_.find(key);
        if (it == store_.end())
            it = store_.emplace(key, simulate_ensemble(js_, D_, x, horizon_, cfg_)).first;
        return it->second;
    }

private:
    const JumpSampler& js_;
    const Domain& D_;
    double horizon_;
    PathConfig cfg_;
    std::map<std::array<double, MAX_DIM + 1>, ExitEnsemble> store_;
};

struct DirectKernel {
    const FreeKernel* k;
    double operator()(double t, double r) const { return k->density(t, r); }
};

inline DensityTable make_path_table(const ModelBundle& mb, const PathConfig& cfg,
                                    double horizon, double r_hi = 16.0) {
    return DensityTable(mb.kernel, mb.nu, 0.5 * cfg.dt, horizon * 1.01, 1e-3, r_hi,
                        36, 96);
}

inline double ratio_se(double ratio, double a, double se_a, double b, double se_b) {
    const double ra = a != 0.0 ? se_a / std::abs(a) : 0.0;
    const double rb = b != 0.0 ? se_b / std::abs(b) : 0.0;
    return std::abs(ratio) * std::sqrt(ra * ra + rb * rb);
}

} // namespace detail

// ---------------------------------------------------------------------------
// two-sided bound: p_D against survival x survival x free kernel

struct HkCheckResult {
    BandStat ratio;   // p_D / [P(tau>t/2 from x) P(tau>t/2 from y) p_{t^V2(R)}]
    BandStat profile; // survival / [e^{-lambda1 t} (V(delta)/(sqrt(t)^V(R)) ^ 1)]
    Lambda1Estimate lam;
    double R = 0.0, V2R = 0.0;
    std::size_t n_flagged = 0; // negative-flagged p_D estimates
    std::string grid_id;
    bool pass = false;
};

inline HkCheckResult check_hk_kula2(const ModelBundle& mb, double R,
                                    const std::vector<double>& ts,
                                    const std::vector<Point>& xs,
                                    const std::vector<Point>& ys,
                                    const PathConfig& cfg) {
    if (ts.empty() || xs.empty() || ys.empty())
        throw config_error("check_hk_kula2: empty grid");
    HkCheckResult out;
    out.R = R;
    out.V2R = mb.V.V(R) * mb.V.V(R);
    out.grid_id = detail::fmt_grid("t", ts) + detail::fmt_points("x", xs) +
                  detail::fmt_points("y", ys);

    const Domain D = Domain::ball(Point::zero(mb.spec.d), R);
    const JumpSampler js(mb.nu, cfg);
    const double t_max = *std::max_element(ts.begin(), ts.end());
    const double lam_horizon = 3.0 * out.V2R;
    const double horizon = std::max(t_max, lam_horizon);
    detail::EnsembleCache cache(js, D, horizon, cfg);
    const DensityTable tab = detail::make_path_table(mb, cfg, horizon, 8.0 * R + 8.0);
    const detail::DirectKernel direct{&mb.kernel};

    out.lam = estimate_lambda1_auto(cache.at(Point::zero(mb.spec.d)));

    for (double t : ts) {
        for (const Point& x : xs) {
            const auto sx = estimate_survival(cache.at(x), 0.5 * t);
            // survival profile at (x, t)
            const double delta = D.delta(x);
            const double shape =
                std::min(mb.V.V(delta) / std::min(std::sqrt(t), mb.V.V(R)), 1.0);
            const auto sx_full = estimate_survival(cache.at(x), t);
            const double surrogate = std::exp(-out.lam.lambda * t) * shape;
            out.profile.add(sx_full.mean / surrogate,
                            sx_full.se / surrogate);
            for (const Point& y : ys) {
                const auto sy = estimate_survival(cache.at(y), 0.5 * t);
                const auto pd = estimate_pD(direct, tab, cache.at(x), t, y);
                if (pd.flagged_negative) ++out.n_flagged;
                const double free = mb.kernel.density(std::min(t, out.V2R),
                                                      (x - y).norm());
                const double denom = sx.mean * sy.mean * free;
                const double ratio = pd.mean / denom;
                const double rel =
                    std::sqrt(std::pow(pd.se / std::max(pd.mean, 1e-300), 2) +
                              std::pow(sx.se / sx.mean, 2) +
                              std::pow(sy.se / sy.mean, 2));
                out.ratio.add(ratio, std::abs(ratio) * rel);
            }
        }
    }
    out.pass = out.ratio.positive() && out.ratio.bounded() &&
               out.profile.positive() && out.profile.bounded();
    return out;
}

// ---------------------------------------------------------------------------
// gradient bound: |grad p_D| against [1/(delta^1) v psi_inv(1/t)] p_D

// CRN gradient of p_D in all coordinates; h = delta(x)/h_div
inline GradEstimate estimate_grad_pD(const ModelBundle& mb, const Domain& D,
                                     double t, const Point& x, const Point& y,
                                     const PathConfig& cfg, double h_div = 8.0) {
    const double delta = D.delta(x);
    const double h = delta / h_div;
    if (!(h > 0.0) || h >= 0.25 * delta)
        throw config_error("estimate_grad_pD: step must satisfy h < delta(x)/4");
    const JumpSampler js(mb.nu, cfg);
    const DensityTable tab = detail::make_path_table(mb, cfg, t);
    const detail::DirectKernel direct{&mb.kernel};
    GradEstimate g;
    g.d = x.d;
    g.h = h;
    for (int i = 0; i < x.d; ++i) {
        Point xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const auto ep = simulate_ensemble(js, D, xp, t, cfg);
        const auto em = simulate_ensemble(js, D, xm, t, cfg);
        g.comp[std::size_t(i)] = estimate_grad_component(direct, tab, ep, em, t, y);
    }
    return g;
}

struct Main1Result {
    BandStat ratio;         // over t <= 1
    BandStat ratio_large_t; // psi_inv(1) variant over t >= 1
    double sup = -INF, sup_se = 0.0, t_at = 0.0;
    Point x_at, y_at;
    // grid range of [general bound] / [closed-form bound] where one exists
    double formula_lo = INF, formula_hi = -INF;
    bool formula_checked = false;
    std::size_t n_flagged = 0;
    std::string grid_id;
    bool pass = false;
};

inline Main1Result check_main1(const ModelBundle& mb, const Domain& D,
                               const std::vector<double>& ts_small,
                               const std::vector<double>& ts_large,
                               const std::vector<Point>& xs,
                               const std::vector<Point>& ys,
                               const PathConfig& cfg, double h_div = 8.0) {
    Main1Result out;
    out.grid_id = detail::fmt_grid("t", ts_small) + detail::fmt_grid("T", ts_large) +
                  detail::fmt_points("x", xs) + detail::fmt_points("y", ys);
    const JumpSampler js(mb.nu, cfg);
    double horizon = 0.0;
    for (double t : ts_small) horizon = std::max(horizon, t);
    for (double t : ts_large) horizon = std::max(horizon, t);
    const DensityTable tab = detail::make_path_table(mb, cfg, horizon);
    const detail::DirectKernel direct{&mb.kernel};
    const double psi_inv_1 = mb.sym.psi_inv(1.0);

    for (const Point& x : xs) {
        const double delta = D.delta(x);
        const double h = delta / h_div;
        if (!(h > 0.0) || h >= 0.25 * delta)
            throw config_error("check_main1: step must satisfy h < delta(x)/4");
        std::vector<ExitEnsemble> plus, minus;
        for (int i = 0; i < x.d; ++i) {
            Point xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            plus.push_back(simulate_ensemble(js, D, xp, horizon, cfg));
            minus.push_back(simulate_ensemble(js, D, xm, horizon, cfg));
        }
        auto eval = [&](double t, bool large) {
            const double inv = large ? psi_inv_1 : mb.sym.psi_inv(1.0 / t);
            const double bound = std::max(1.0 / std::min(delta, 1.0), inv);
            for (const Point& y : ys) {
                GradEstimate g;
                g.d = x.d;
                g.h = h;
                for (int i = 0; i < x.d; ++i)
                    g.comp[std::size_t(i)] = estimate_grad_component(
                        direct, tab, plus[std::size_t(i)], minus[std::size_t(i)], t, y);
                const auto pd_p = estimate_pD(direct, tab, plus[0], t, y);
                const auto pd_m = estimate_pD(direct, tab, minus[0], t, y);
                const double pd = 0.5 * (pd_p.mean + pd_m.mean);
                const double pd_se = 0.5 * std::hypot(pd_p.se, pd_m.se);
                if (pd_p.flagged_negative || pd_m.flagged_negative) ++out.n_flagged;
                const double ratio = g.norm() / (bound * pd);
                const double se =
                    detail::ratio_se(ratio, g.norm(), g.norm_stderr(), pd, pd_se);
                (large ? out.ratio_large_t : out.ratio).add(ratio, se);
                if (!large && ratio > out.sup) {
                    out.sup = ratio;
                    out.sup_se = se;
                    out.t_at = t;
                    out.x_at = x;
                    out.y_at = y;
                }
                // closed-form specializations of the bound
                if (!large && (mb.spec.family == Family::Stable ||
                               mb.spec.family == Family::Relativistic)) {
                    const double special =
                        mb.spec.family == Family::Stable
                            ? 1.0 / std::min(delta, std::pow(t, 1.0 / mb.spec.alpha))
                            : 1.0 / std::min(delta, t);
                    const double q = bound / special;
                    out.formula_lo = std::min(out.formula_lo, q);
                    out.formula_hi = std::max(out.formula_hi, q);
                    out.formula_checked = true;
                }
            }
        };
        for (double t : ts_small) eval(t, false);
        for (double t : ts_large) eval(t, true);
    }
    out.pass = std::isfinite(out.sup) && out.sup > 0.0 && out.ratio.bounded() &&
               (ts_large.empty() || out.ratio_large_t.bounded());
    return out;
}

// ---------------------------------------------------------------------------
// exit law: P(tau in A, X_tau in B) against the double integral of
// p_D(s, x, .) nu(. - z)

struct IwResult {
    double lhs = 0.0, lhs_se = 0.0;
    double rhs = 0.0, rhs_se = 0.0;
    double quad_gap = 0.0; // node-halving difference of the rhs
    double discrepancy = 0.0;
    double tolerance = 0.0; // 3 sqrt(lhs_se^2 + rhs_se^2) + quad_gap
    double boundary_mass = 0.0; // exits within 1e-9 of the boundary
    double censored_frac = 0.0;
    bool pass = false;
};

// d = 1, D = (-R, R), A = (a_lo, a_hi], B = (b_lo, b_hi) to the right of D
inline IwResult check_ikeda_watanabe(const ModelBundle& mb, double R, double a_lo,
                                     double a_hi, double b_lo, double b_hi,
                                     const PathConfig& cfg, const Point& x,
                                     std::size_t n_s = 8, std::size_t n_u = 24) {
    if (mb.spec.d != 1)
        throw config_error("check_ikeda_watanabe: implemented for d = 1");
    if (!(0.0 <= a_lo && a_lo < a_hi) || !(R <= b_lo && b_lo < b_hi))
        throw config_error("check_ikeda_watanabe: bad window");
    IwResult out;
    const Domain D = Domain::ball(Point::zero(1), R);
    const JumpSampler js(mb.nu, cfg);
    const auto ens = simulate_ensemble(js, D, x, a_hi, cfg);
    const DensityTable tab = detail::make_path_table(mb, cfg, a_hi, 8.0 * R + 8.0);
    const detail::DirectKernel direct{&mb.kernel};

    { // left side: exit histogram
        std::vector<double> v(ens.size(), 0.0);
        std::size_t n_boundary = 0, n_censored = 0;
        for (std::size_t i = 0; i < ens.size(); ++i) {
            const auto& s = ens.paths[i];
            if (s.censored) {
                ++n_censored;
                continue;
            }
            if (D.distance_outside(s.exit_point) <= 1e-9) ++n_boundary;
            if (s.tau > a_lo && s.tau <= a_hi && s.exit_point[0] > b_lo &&
                s.exit_point[0] < b_hi)
                v[i] = 1.0;
        }
        const auto mc = mc_from_values(v, cfg.seed);
        out.lhs = mc.mean;
        out.lhs_se = mc.se;
        out.boundary_mass = double(n_boundary) / double(ens.size());
        out.censored_frac = double(n_censored) / double(ens.size());
    }

    // right side; the y integral substitutes y = R - u^2 so that the
    // square-root decay of p_D at the B-facing endpoint absorbs the
    // nonintegrable-looking spike of the jump intensity there
    auto big_jump_mass = [&](double y) { // int_B nu(z - y) dz
        const auto q = adaptive_gk([&](double z) { return mb.nu(z - y); }, b_lo,
                                   b_hi, 1e-9, 0.0, 4000);
        return q.value;
    };
    auto rhs_at = [&](std::size_t ns, std::size_t nu_nodes, double* mc_se) {
        const double u_max = std::sqrt(2.0 * R);
        const double du = u_max / double(nu_nodes);
        const double ds = (a_hi - a_lo) / double(ns);
        KahanSum acc, err;
        for (std::size_t j = 0; j < ns; ++j) {
            const double s = a_lo + (double(j) + 0.5) * ds;
            for (std::size_t m = 0; m < nu_nodes; ++m) {
                const double u = (double(m) + 0.5) * du;
                const double y = R - u * u;
                const auto pd = estimate_pD(direct, tab, ens, s, axis_point(1, y));
                const double w = ds * du * 2.0 * u * big_jump_mass(y);
                acc.add(w * std::max(pd.mean, 0.0));
                err.add(w * pd.se);
            }
        }
        if (mc_se) *mc_se = err.value();
        return acc.value();
    };
    double se_full = 0.0;
    out.rhs = rhs_at(n_s, n_u, &se_full);
    out.rhs_se = se_full;
    const double coarse = rhs_at(n_s / 2, n_u / 2, nullptr);
    out.quad_gap = std::abs(out.rhs - coarse);

    out.discrepancy = std::abs(out.lhs - out.rhs);
    out.tolerance = 3.0 * std::hypot(out.lhs_se, out.rhs_se) + out.quad_gap;
    out.pass = out.discrepancy <= out.tolerance;
    return out;
}

// ---------------------------------------------------------------------------
// reflection difference: 0 <= p_D(t,x,y) - p_D(t,x^,y) <= free difference

struct KeyCheckResult {
    struct Entry {
        double t = 0.0;
        Point x, y;
        double diff = 0.0, se = 0.0;
        double upper = 0.0; // free-kernel difference
        bool ok = false;
    };
    std::vector<Entry> entries;
    std::string grid_id;
    std::size_t n = 0;
    bool pass = false;
};

inline KeyCheckResult check_key(const ModelBundle& mb, const Domain& D,
                                const std::vector<double>& ts,
                                const std::vector<Point>& xs,
                                const std::vector<Point>& ys,
                                const PathConfig& cfg) {
    if (!D.is_symmetric()) throw config_error("check_key: domain must be symmetric");
    KeyCheckResult out;
    out.grid_id = detail::fmt_grid("t", ts) + detail::fmt_points("x", xs) +
                  detail::fmt_points("y", ys);
    const JumpSampler js(mb.nu, cfg);
    const double horizon = *std::max_element(ts.begin(), ts.end());
    detail::EnsembleCache cache(js, D, horizon, cfg);
    const DensityTable tab = detail::make_path_table(mb, cfg, horizon);
    const detail::DirectKernel direct{&mb.kernel};

    out.pass = true;
    for (const Point& x : xs) {
        if (!(x[0] > 0.0)) throw config_error("check_key: x must lie in the x1 > 0 half");
        const auto& ens = cache.at(x);
        for (double t : ts)
            for (const Point& y : ys) {
                if (!(y[0] > 0.0))
                    throw config_error("check_key: y must lie in the x1 > 0 half");
                const auto d = diff_pD(direct, tab, ens, t, y);
                KeyCheckResult::Entry e;
                e.t = t;
                e.x = x;
                e.y = y;
                e.diff = d.mean;
                e.se = d.se;
                e.upper = diff_free(mb.kernel, t, x, y);
                e.ok = d.mean >= -3.0 * d.se && d.mean <= e.upper + 3.0 * d.se;
                out.pass = out.pass && e.ok;
                out.entries.push_back(e);
                ++out.n;
            }
    }
    return out;
}

// ---------------------------------------------------------------------------
// reflection-difference ratio lemmas on the ball (and unions for the last one)

struct LemResult {
    BandStat ratio;
    double sup = -INF, sup_se = 0.0, t_at = 0.0;
    Point x_at, y_at;
    std::size_t n_negative = 0; // diff estimates below -3 s.e.
    std::string grid_id;
    bool pass = false;
};

namespace detail {

// shared machinery: sup over the grid of diff_pD / (prefactor * p_D)
template <class Prefactor>
LemResult diff_ratio_sup(const ModelBundle& mb, const Domain& D,
                         const std::vector<double>& ts,
                         const std::vector<Point>& xs,
                         const std::vector<Point>& ys, const PathConfig& cfg,
                         Prefactor&& pref) {
    LemResult out;
    out.grid_id = fmt_grid("t", ts) + fmt_points("x", xs) + fmt_points("y", ys);
    const JumpSampler js(mb.nu, cfg);
    const double horizon = *std::max_element(ts.begin(), ts.end());
    EnsembleCache cache(js, D, horizon, cfg);
    const DensityTable tab = make_path_table(mb, cfg, horizon);
    const DirectKernel direct{&mb.kernel};

    for (const Point& x : xs) {
        const auto& ens = cache.at(x);
        const double hx = 2.0 * x[0]; // |x - reflect(x)|
        for (double t : ts)
            for (const Point& y : ys) {
                const auto d = diff_pD(direct, tab, ens, t, y);
                if (d.flagged_negative) ++out.n_negative;
                const auto pd = estimate_pD(direct, tab, ens, t, y);
                const double denom = pref(t, x, y, hx) * pd.mean;
                const double ratio = d.mean / denom;
                const double se = ratio_se(ratio, d.mean, d.se, pd.mean, pd.se);
                out.ratio.add(ratio, se);
                if (ratio > out.sup) {
                    out.sup = ratio;
                    out.sup_se = se;
                    out.t_at = t;
                    out.x_at = x;
                    out.y_at = y;
                }
            }
    }
    out.pass = std::isfinite(out.sup) && out.ratio.bounded() && out.n_negative == 0;
    return out;
}

} // namespace detail

// bound c |x^ - x| (1/r v 1/V_inv(sqrt(t))) p_B on B(0,r), x on the axis
// within r/16, y anywhere in the x1 > 0 half of the ball
inline LemResult check_lem4(const ModelBundle& mb, double r,
                            const std::vector<double>& ts,
                            const std::vector<double>& x1s,
                            const std::vector<Point>& ys, const PathConfig& cfg) {
    const Domain D = Domain::ball(Point::zero(mb.spec.d), r);
    std::vector<Point> xs;
    for (double x1 : x1s) {
        if (!(0.0 < x1 && x1 < r / 16.0))
            throw config_error("check_lem4: x must satisfy 0 < |x| < r/16");
        xs.push_back(axis_point(mb.spec.d, x1));
    }
    return detail::diff_ratio_sup(
        mb, D, ts, xs, ys, cfg, [&](double t, const Point&, const Point&, double hx) {
            return hx * std::max(1.0 / r, 1.0 / mb.V.V_inv(std::sqrt(t)));
        });
}

// bound c (|x - x^| / |y|) p_B, y in the inner quarter-ball
inline LemResult check_lem3(const ModelBundle& mb, double r,
                            const std::vector<double>& ts,
                            const std::vector<double>& x1s,
                            const std::vector<Point>& ys, const PathConfig& cfg) {
    const Domain D = Domain::ball(Point::zero(mb.spec.d), r);
    std::vector<Point> xs;
    for (double x1 : x1s) {
        if (!(0.0 < x1 && x1 < r / 16.0))
            throw config_error("check_lem3: x must satisfy 0 < |x| < r/16");
        xs.push_back(axis_point(mb.spec.d, x1));
    }
    for (const Point& y : ys)
        if (!(y.norm() <= r / 4.0 && y[0] > 0.0))
            throw config_error("check_lem3: y must lie in the inner quarter-ball, x1 > 0");
    return detail::diff_ratio_sup(
        mb, D, ts, xs, ys, cfg,
        [&](double, const Point&, const Point& y, double hx) { return hx / y.norm(); });
}

// bound c (|x^ - x| / r) p_B, y outside the inner quarter-ball
inline LemResult check_lem5(const ModelBundle& mb, double r,
                            const std::vector<double>& ts,
                            const std::vector<double>& x1s,
                            const std::vector<Point>& ys, const PathConfig& cfg) {
    const Domain D = Domain::ball(Point::zero(mb.spec.d), r);
    std::vector<Point> xs;
    for (double x1 : x1s) {
        if (!(0.0 < x1 && x1 < r / 16.0))
            throw config_error("check_lem5: x must satisfy 0 < |x| < r/16");
        xs.push_back(axis_point(mb.spec.d, x1));
    }
    for (const Point& y : ys)
        if (!(y.norm() > r / 4.0 && y[0] > 0.0))
            throw config_error("check_lem5: y must lie outside the inner quarter-ball");
    return detail::diff_ratio_sup(
        mb, D, ts, xs, ys, cfg,
        [&](double, const Point&, const Point&, double hx) { return hx / r; });
}

// bound c |x^ - x| [1/r v 1/V_inv(sqrt(t))] p_D on a general symmetric domain
// containing 0, with r = delta(0) ^ 1
inline LemResult check_m_estimate(const ModelBundle& mb, const Domain& D,
                                  const std::vector<double>& ts,
                                  const std::vector<double>& x1s,
                                  const std::vector<Point>& ys,
                                  const PathConfig& cfg) {
    if (!D.is_symmetric())
        throw config_error("check_m_estimate: domain must be symmetric");
    const double r = std::min(D.delta(Point::zero(mb.spec.d)), 1.0);
    if (!(r > 0.0)) throw config_error("check_m_estimate: 0 must lie inside the domain");
    std::vector<Point> xs;
    for (double x1 : x1s) {
        if (!(0.0 < x1 && x1 < r / 16.0))
            throw config_error("check_m_estimate: x must satisfy 0 < |x| < r/16");
        xs.push_back(axis_point(mb.spec.d, x1));
    }
    return detail::diff_ratio_sup(
        mb, D, ts, xs, ys, cfg, [&, r](double t, const Point&, const Point&, double hx) {
            return hx * std::max(1.0 / r, 1.0 / mb.V.V_inv(std::sqrt(t)));
        });
}

// ---------------------------------------------------------------------------
// reflection difference of the jump intensity and its quotient bound

inline double nu_tilde(const LevyDensity& nu, const Point& v, const Point& z) {
    const double r1 = (v - z).norm();
    const double r2 = (reflect_first(v) - z).norm();
    if (r1 <= 0.0) throw std::invalid_argument("nu_tilde: v == z");
    return nu(r1) - (r2 > 0.0 ? nu(r2) : nu(r1));
}

struct QuotientResult {
    double sup = -INF;
    double v1_at = 0.0, z1_at = 0.0, lat_at = 0.0;
    bool nonneg_ok = true;   // nu_tilde >= 0 on the half-space grid
    bool dominated_ok = true; // nu_tilde <= nu(v - z)
    std::size_t n = 0;
    std::string grid_id;
    bool pass = false;
};

// d = 2 grid: v = (v1, 0), z = (z1, lateral)
inline QuotientResult check_ABLevyquotient(const LevyDensity& nu,
                                           const std::vector<double>& v1s,
                                           const std::vector<double>& z1s,
                                           const std::vector<double>& laterals) {
    if (nu.spec().d != 2)
        throw config_error("check_ABLevyquotient: needs a d = 2 density");
    QuotientResult out;
    out.grid_id = detail::fmt_grid("v1", v1s) + detail::fmt_grid("z1", z1s) +
                  detail::fmt_grid("lat", laterals);
    for (double v1 : v1s)
        for (double z1 : z1s)
            for (double lat : laterals) {
                const Point v = make_point({v1, 0.0});
                const Point z = make_point({z1, lat});
                if ((v - z).norm() <= 0.0) continue;
                const double nt = nu_tilde(nu, v, z);
                const double base = nu((v - z).norm());
                if (nt < -1e-12 * base) out.nonneg_ok = false;
                if (nt > base * (1.0 + 1e-12)) out.dominated_ok = false;
                double ratio = 0.0;
                if (z1 > 0.0) {
                    const double r1 = (v - z).norm();
                    const double r2 = (v - reflect_first(z)).norm();
                    const double bound =
                        2.0 * z1 * base / std::min(1.0, r1) * (1.0 + r2 / r1);
                    ratio = nt / bound;
                }
                if (ratio > out.sup) {
                    out.sup = ratio;
                    out.v1_at = v1;
                    out.z1_at = z1;
                    out.lat_at = lat;
                }
                ++out.n;
            }
    out.pass = out.nonneg_ok && out.dominated_ok && std::isfinite(out.sup);
    return out;
}

// ---------------------------------------------------------------------------
// positivity constants over published grids

struct ConstantsReport {
    double psi_ratio_floor = 0.0;   // inf psi(y)/psi(x) (x/y)^alpha_lower
    double near_diag_floor = 0.0;   // inf p_t(x) / min(p_{t/2}(0), t/(V^2 |x|^d))
    double small_time_floor = 0.0;  // 1 ^ inf (p_t(x)/t) V^2(|x|) |x|^d
    double levy_product_floor = 0.0; // inf nu(x) V^2(|x|) |x|^d
    double annulus_floor = 0.0;     // inf nu(B_R \ B_rho) V^2(rho)
    double R = 0.0;
    std::string model_id;
    bool all_positive = false;
};

inline ConstantsReport estimate_appendix_constants(const ModelBundle& mb, double R) {
    if (!(R > 0.0)) throw config_error("estimate_appendix_constants: R must be > 0");
    ConstantsReport out;
    out.R = R;
    out.model_id = mb.spec.id();
    const int d = mb.spec.d;
    const double al = default_scaling_exponents(mb.spec).lower;

    { // frequency-ratio floor over y >= x >= 1/R
        double best = INF;
        for (double x : log_grid(1.0 / R, 1e3 / R, 25))
            for (double lam : log_grid(1.0, 1e3, 25)) {
                const double y = lam * x;
                best = std::min(best, mb.sym.psi(y) / mb.sym.psi(x) *
                                          std::pow(x / y, al));
            }
        out.psi_ratio_floor = best;
    }
    auto V2 = [&](double r) { const double v = mb.V.V(r); return v * v; };
    { // near-diagonal floor over t <= V^2(R), |x| <= R
        double best = INF;
        const double T = V2(R);
        for (double t : log_grid(1e-3 * T, T, 12)) {
            const double half = mb.kernel.p0(d, 0.5 * t);
            for (double r : log_grid(1e-3 * R, R, 15)) {
                const double cap = std::min(half, t / (V2(r) * std::pow(r, d)));
                best = std::min(best, mb.kernel.density(t, r) / cap);
            }
        }
        out.near_diag_floor = best;
    }
    { // small-time on-diagonal floor over t <= V^2(|x|)
        double best = 1.0;
        for (double r : log_grid(1e-3 * R, R, 15)) {
            const double T = V2(r);
            for (double t : log_grid(1e-3 * T, T, 10))
                best = std::min(best, mb.kernel.density(t, r) / t * T *
                                          std::pow(r, d));
        }
        out.small_time_floor = best;
    }
    { // jump-intensity product floor
        double best = INF;
        for (double r : log_grid(1e-4 * R, R, 40))
            best = std::min(best, mb.nu(r) * V2(r) * std::pow(r, d));
        out.levy_product_floor = best;
    }
    { // annulus-mass floor over rho <= R/2
        double best = INF;
        const double tail_R = mb.nu.tail_mass(R);
        for (double rho : log_grid(1e-3 * R, 0.5 * R, 12))
            best = std::min(best, (mb.nu.tail_mass(rho) - tail_R) * V2(rho));
        out.annulus_floor = best;
    }
    out.all_positive = out.psi_ratio_floor > 0.0 && out.near_diag_floor > 0.0 &&
                       out.small_time_floor > 0.0 && out.levy_product_floor > 0.0 &&
                       out.annulus_floor > 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// structural invariants used as spot checks

struct MonotonicityCheck {
    double pd_small = 0.0, se_small = 0.0;
    double pd_big = 0.0, se_big = 0.0;
    double free_kernel = 0.0;
    bool pass = false;
};

inline MonotonicityCheck check_domain_monotonicity(const ModelBundle& mb,
                                                   double R_small, double R_big,
                                                   double t, const Point& x,
                                                   const Point& y,
                                                   const PathConfig& cfg) {
    if (!(R_small < R_big))
        throw config_error("check_domain_monotonicity: needs R_small < R_big");
    const JumpSampler js(mb.nu, cfg);
    const DensityTable tab = detail::make_path_table(mb, cfg, t, 8.0 * R_big + 8.0);
    const detail::DirectKernel direct{&mb.kernel};
    MonotonicityCheck out;
    const Domain Ds = Domain::ball(Point::zero(mb.spec.d), R_small);
    const Domain Db = Domain::ball(Point::zero(mb.spec.d), R_big);
    const auto ps = estimate_pD(direct, tab, simulate_ensemble(js, Ds, x, t, cfg), t, y);
    const auto pb = estimate_pD(direct, tab, simulate_ensemble(js, Db, x, t, cfg), t, y);
    out.pd_small = ps.mean;
    out.se_small = ps.se;
    out.pd_big = pb.mean;
    out.se_big = pb.se;
    out.free_kernel = mb.kernel.density(t, (x - y).norm());
    const double joint = 3.0 * std::hypot(ps.se, pb.se);
    out.pass = ps.mean <= pb.mean + joint &&
               pb.mean <= out.free_kernel + 3.0 * pb.se;
    return out;
}

struct SemigroupCheck {
    double lhs = 0.0, lhs_se = 0.0;
    double rhs = 0.0, rhs_se = 0.0;
    bool pass = false;
};

// p_D(t+s, x, y) against int_D p_D(t, x, z) p_D(s, y, z) dz (symmetry in the
// second factor); d = 1 ball, cosine substitution for the endpoint decay
inline SemigroupCheck check_semigroup(const ModelBundle& mb, double R, double t,
                                      double s, const Point& x, const Point& y,
                                      const PathConfig& cfg, std::size_t n_nodes = 48) {
    if (mb.spec.d != 1) throw config_error("check_semigroup: implemented for d = 1");
    const Domain D = Domain::ball(Point::zero(1), R);
    const JumpSampler js(mb.nu, cfg);
    const double horizon = t + s;
    const DensityTable tab = detail::make_path_table(mb, cfg, horizon, 8.0 * R + 8.0);
    const detail::DirectKernel direct{&mb.kernel};
    const auto ex = simulate_ensemble(js, D, x, horizon, cfg);
    const auto ey = simulate_ensemble(js, D, y, horizon, cfg);

    SemigroupCheck out;
    const auto lhs = estimate_pD(direct, tab, ex, t + s, y);
    out.lhs = lhs.mean;
    out.lhs_se = lhs.se;
    KahanSum acc, err;
    const double dth = PI / double(n_nodes);
    for (std::size_t j = 0; j < n_nodes; ++j) {
        const double th = -0.5 * PI + (double(j) + 0.5) * dth;
        const Point z = axis_point(1, R * std::sin(th));
        const double w = R * std::cos(th) * dth;
        const auto a = estimate_pD(direct, tab, ex, t, z);
        const auto b = estimate_pD(direct, tab, ey, s, z);
        acc.add(w * std::max(a.mean, 0.0) * std::max(b.mean, 0.0));
        err.add(w * (std::abs(a.mean) * b.se + std::abs(b.mean) * a.se));
    }
    out.rhs = acc.value();
    out.rhs_se = err.value();
    out.pass = std::abs(out.lhs - out.rhs) <=
               3.0 * std::hypot(out.lhs_se, out.rhs_se) + 0.02 * std::abs(out.lhs);
    return out;
}

} // namespace levyhk

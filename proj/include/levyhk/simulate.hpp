#pragma once

// Exit-time Monte Carlo for the killed process on a ball domain.
//
// Scheme: big jumps (radius > eps) arrive as a compound Poisson process with
// the exact radial law; the small-jump part is replaced by a Brownian motion
// matching its second moment (per coordinate), applied on a fixed dt grid.
// Exit is detected at jump landings and grid endpoints only.  Paths are
// reproducible: path i draws from the Philox stream keyed (seed, i), so the
// ensemble is bit-identical no matter how the loop is scheduled or chunked.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "common.hpp"
#include "domain.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace levyhk {

struct PathConfig {
    double eps = 0.05;
    double dt = 1e-3;
    bool substitute_gaussian = true;
    std::size_t n_paths = 20000;
    std::uint64_t seed = 1;

    void validate(double big_jump_rate) const {
        if (!(eps > 0.0)) throw config_error("PathConfig: eps must be positive");
        if (!(dt > 0.0)) throw config_error("PathConfig: dt must be positive");
        if (n_paths == 0) throw config_error("PathConfig: n_paths must be positive");
        if (big_jump_rate * dt > 0.1)
            throw config_error("PathConfig: big-jump rate * dt exceeds 0.1; "
                               "raise eps or shrink dt");
    }
};

// Radial inverse-CDF sampler for jumps of size > eps, plus the matched
// Gaussian substitution for the discarded small jumps.
class JumpSampler {
public:
    JumpSampler(const LevyDensity& nu, const PathConfig& cfg)
        : nu_(nu), d_(nu.spec().d), eps_(cfg.eps) {
        lambda_ = nu_.tail_mass(eps_);
        sigma_coord_ = cfg.substitute_gaussian
                           ? std::sqrt(nu_.small_ball_second_moment(eps_) / d_)
                           : 0.0;
        if (nu_.spec().family == Family::Stable) {
            exact_stable_ = true;
        } else {
            build_inverse_table();
        }
    }

    const LevyDensity& density() const { return nu_; }
    int dim() const { return d_; }
    double eps() const { return eps_; }
    double lambda() const { return lambda_; }          // big-jump rate
    double sigma_coord() const { return sigma_coord_; } // per unit time

    double sample_radius(Rng& rng) const {
        const double u = rng.uniform();
        if (exact_stable_) return eps_ * std::pow(u, -1.0 / nu_.spec().alpha);
        return inverse_(u);
    }

    Point sample_jump(Rng& rng) const {
        const double r = sample_radius(rng); // radius first, then direction
        Point dir = rng.unit_vector(d_);
        for (int i = 0; i < d_; ++i) dir[i] *= r;
        return dir;
    }

private:
    void build_inverse_table() {
        double r_max = eps_;
        while (nu_.tail_mass(r_max) > 1e-12 * lambda_) {
            r_max *= 2.0;
            if (r_max > 1e15 * eps_)
                throw numeric_error("JumpSampler: jump tail does not reach 1e-12");
        }
        const double decades = std::log10(r_max / eps_);
        const std::size_t n = std::max<std::size_t>(120, std::size_t(24.0 * decades));
        const auto rs = log_grid(eps_, r_max, n);
        std::vector<double> su(n);
        for (std::size_t i = 0; i < n; ++i) su[i] = nu_.tail_mass(rs[i]) / lambda_;
        su.front() = 1.0;
        for (std::size_t i = 1; i < n; ++i) // strict monotonicity for the inverse
            if (su[i] >= su[i - 1]) su[i] = su[i - 1] * (1.0 - 1e-15);
        std::vector<double> us(su.rbegin(), su.rend());
        std::vector<double> radii(rs.rbegin(), rs.rend());
        inverse_ = LogLogInterp(us, radii);
    }

    LevyDensity nu_;
    int d_;
    double eps_;
    double lambda_ = 0.0;
    double sigma_coord_ = 0.0;
    bool exact_stable_ = false;
    LogLogInterp inverse_;
};

struct ExitSample {
    double tau = 0.0;
    Point exit_point;
    bool censored = false;
};

struct ExitEnsemble {
    Point start;
    double horizon = 0.0;
    PathConfig cfg;
    std::vector<ExitSample> paths;

    std::size_t size() const { return paths.size(); }
};

inline ExitSample sample_exit(const JumpSampler& js, const Domain& D,
                              const Point& x, double horizon,
                              const PathConfig& cfg, std::uint64_t path_index = 0) {
    if (x.d != D.dim() || x.d != js.dim())
        throw std::invalid_argument("sample_exit: dimension mismatch");
    if (!(horizon > 0.0)) throw std::invalid_argument("sample_exit: horizon <= 0");
    if (D.distance_outside(x) > 1e-12)
        throw std::invalid_argument("sample_exit: start point outside the domain");
    cfg.validate(js.lambda());
    if (!D.contains(x)) return {0.0, x, false}; // started on the boundary

    Rng rng(cfg.seed, path_index);
    Point pos = x;
    const double lam = js.lambda();
    const double sd = js.sigma_coord() * std::sqrt(cfg.dt);
    double t_jump = lam > 0.0 ? rng.exponential(lam) : INF;
    long step = 1;
    double t_grid = cfg.dt;
    while (true) {
        if (t_jump <= t_grid && t_jump < horizon) {
            pos += js.sample_jump(rng);
            if (!D.contains(pos)) return {t_jump, pos, false};
            t_jump += rng.exponential(lam);
        } else if (t_grid < horizon) {
            if (sd > 0.0)
                for (int i = 0; i < pos.d; ++i) pos[i] += sd * rng.normal();
            if (!D.contains(pos)) return {t_grid, pos, false};
            ++step;
            t_grid = cfg.dt * double(step);
        } else {
            return {horizon, pos, true};
        }
    }
}

inline ExitEnsemble simulate_ensemble(const JumpSampler& js, const Domain& D,
                                      const Point& x, double horizon,
                                      const PathConfig& cfg) {
    ExitEnsemble e;
    e.start = x;
    e.horizon = horizon;
    e.cfg = cfg;
    e.paths.resize(cfg.n_paths);
    for (std::size_t i = 0; i < cfg.n_paths; ++i)
        e.paths[i] = sample_exit(js, D, x, horizon, cfg, i);
    return e;
}

// The mirrored process: by isotropy of the jumps and symmetry of the domain,
// reflecting every path of an ensemble started at x gives the ensemble
// started at reflect(x), with the same exit times (common jump sequence).
inline ExitEnsemble reflected_ensemble(const ExitEnsemble& e) {
    ExitEnsemble out = e;
    out.start = reflect_first(e.start);
    for (auto& s : out.paths) s.exit_point = reflect_first(s.exit_point);
    return out;
}

struct McEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

// Fixed-order chunked reduction (4096-path blocks): the reduction tree does
// not depend on how the work was produced, so results are bit-stable.
inline McEstimate mc_from_values(const std::vector<double>& v, std::uint64_t seed) {
    const std::size_t n = v.size();
    if (n < 2) throw config_error("mc_from_values: need at least two paths");
    constexpr std::size_t CHUNK = 4096;
    KahanSum total;
    for (std::size_t a = 0; a < n; a += CHUNK) {
        KahanSum part;
        for (std::size_t i = a; i < std::min(n, a + CHUNK); ++i) part.add(v[i]);
        total.add(part.value());
    }
    const double mean = total.value() / double(n);
    KahanSum sq;
    for (std::size_t a = 0; a < n; a += CHUNK) {
        KahanSum part;
        for (std::size_t i = a; i < std::min(n, a + CHUNK); ++i) {
            const double d = v[i] - mean;
            part.add(d * d);
        }
        sq.add(part.value());
    }
    const double var = sq.value() / double(n - 1);
    return {mean, std::sqrt(std::max(var, 0.0) / double(n)), n, seed};
}

inline McEstimate estimate_survival(const ExitEnsemble& e, double t) {
    if (!(t > 0.0) || t > e.horizon * (1.0 + 1e-12))
        throw config_error("estimate_survival: t outside (0, horizon]");
    std::vector<double> v(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        const auto& s = e.paths[i];
        v[i] = (s.censored || s.tau > t) ? 1.0 : 0.0;
    }
    return mc_from_values(v, e.cfg.seed);
}

struct PdEstimate : McEstimate {
    std::size_t n_clamped = 0;   // exits within dt of t: kernel time clamped to dt
    bool flagged_negative = false; // mean < -3 s.e. (possible near the boundary)
};

// E_x[ p_{t-tau}(X_tau - y) ; tau < t ], the mass the free kernel puts back
// through the exit position.
template <class PF>
PdEstimate estimate_exit_term(const PF& pf, const ExitEnsemble& e, double t,
                              const Point& y) {
    if (y.d != e.start.d) throw std::invalid_argument("estimate_exit_term: dim mismatch");
    if (!(t > 0.0) || t > e.horizon * (1.0 + 1e-12))
        throw config_error("estimate_exit_term: t outside (0, horizon]");
    PdEstimate out;
    std::vector<double> v(e.size(), 0.0);
    for (std::size_t i = 0; i < e.size(); ++i) {
        const auto& s = e.paths[i];
        if (s.censored || s.tau >= t) continue;
        double rem = t - s.tau;
        if (rem < e.cfg.dt) { // below the scheme's time resolution
            rem = e.cfg.dt;
            ++out.n_clamped;
        }
        v[i] = pf(rem, (s.exit_point - y).norm());
    }
    static_cast<McEstimate&>(out) = mc_from_values(v, e.cfg.seed);
    return out;
}

// p_D(t, x, y) = p_t(|x - y|) - E_x[ p_{t - tau}(X_tau - y) ; tau < t ].
// `base` prices the deterministic whole-space term (use the direct kernel),
// `path` prices the per-path exit terms (a density table is fine there).
template <class PFBase, class PFPath>
PdEstimate estimate_pD(const PFBase& base, const PFPath& path,
                       const ExitEnsemble& e, double t, const Point& y) {
    PdEstimate out = estimate_exit_term(path, e, t, y);
    out.mean = base(t, (e.start - y).norm()) - out.mean;
    out.flagged_negative = out.mean < -3.0 * out.se;
    return out;
}

template <class PF>
PdEstimate estimate_pD(const PF& pf, const ExitEnsemble& e, double t, const Point& y) {
    return estimate_pD(pf, pf, e, t, y);
}

// p_D(t, x, y) - p_D(t, reflect(x), y) via reflection coupling: the mirrored
// ensemble shares the jump sequence, so the difference is evaluated path by
// path and the common noise cancels.
template <class PFBase, class PFPath>
PdEstimate diff_pD(const PFBase& base, const PFPath& path, const ExitEnsemble& e,
                   double t, const Point& y) {
    if (y.d != e.start.d) throw std::invalid_argument("diff_pD: dim mismatch");
    if (!(t > 0.0) || t > e.horizon * (1.0 + 1e-12))
        throw config_error("diff_pD: t outside (0, horizon]");
    PdEstimate out;
    std::vector<double> v(e.size(), 0.0);
    for (std::size_t i = 0; i < e.size(); ++i) {
        const auto& s = e.paths[i];
        if (s.censored || s.tau >= t) continue;
        double rem = t - s.tau;
        if (rem < e.cfg.dt) {
            rem = e.cfg.dt;
            ++out.n_clamped;
        }
        const double r1 = (s.exit_point - y).norm();
        const double r2 = (reflect_first(s.exit_point) - y).norm();
        v[i] = path(rem, r1) - path(rem, r2);
    }
    static_cast<McEstimate&>(out) = mc_from_values(v, e.cfg.seed);
    const double b = base(t, (e.start - y).norm()) -
                     base(t, (reflect_first(e.start) - y).norm());
    out.mean = b - out.mean;
    out.flagged_negative = out.mean < -3.0 * out.se;
    return out;
}

// One directional derivative by a common-random-number centered difference.
// The two ensembles must share (seed, n_paths): path i of each then uses the
// same Philox stream, so the noise cancels pathwise in the difference.
template <class PFBase, class PFPath>
McEstimate estimate_grad_component(const PFBase& base, const PFPath& path,
                                   const ExitEnsemble& plus,
                                   const ExitEnsemble& minus, double t,
                                   const Point& y) {
    if (plus.size() != minus.size() || plus.cfg.seed != minus.cfg.seed)
        throw config_error("estimate_grad_component: ensembles are not CRN-coupled");
    const double h2 = (plus.start - minus.start).norm();
    if (!(h2 > 0.0)) throw config_error("estimate_grad_component: coincident starts");
    if (!(t > 0.0) || t > std::min(plus.horizon, minus.horizon) * (1.0 + 1e-12))
        throw config_error("estimate_grad_component: t outside (0, horizon]");
    std::vector<double> v(plus.size(), 0.0);
    auto term = [&](const ExitSample& s) {
        if (s.censored || s.tau >= t) return 0.0;
        const double rem = std::max(t - s.tau, plus.cfg.dt);
        return path(rem, (s.exit_point - y).norm());
    };
    for (std::size_t i = 0; i < plus.size(); ++i)
        v[i] = (term(plus.paths[i]) - term(minus.paths[i])) / h2;
    McEstimate out = mc_from_values(v, plus.cfg.seed);
    const double det = (base(t, (plus.start - y).norm()) -
                        base(t, (minus.start - y).norm())) /
                       h2;
    out.mean = det - out.mean;
    return out;
}

struct GradEstimate {
    std::array<McEstimate, MAX_DIM> comp{};
    int d = 0;
    double h = 0.0;

    double norm() const {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += comp[std::size_t(i)].mean * comp[std::size_t(i)].mean;
        return std::sqrt(s);
    }
    double norm_stderr() const { // delta method; conservative at the origin
        const double m = norm();
        double s = 0.0;
        for (int i = 0; i < d; ++i) {
            const auto& c = comp[std::size_t(i)];
            const double w = m > 0.0 ? c.mean / m : 1.0;
            s += w * w * c.se * c.se;
        }
        return std::sqrt(s);
    }
};

struct Lambda1Estimate {
    double lambda = 0.0;
    double se = 0.0; // OLS residual-based
    double t_lo = 0.0, t_hi = 0.0;
    std::size_t n_nodes = 0;
};

// Least-squares slope of -log survival over [t_lo, t_hi].
inline Lambda1Estimate estimate_lambda1(const ExitEnsemble& e, double t_lo,
                                        double t_hi, std::size_t n_nodes = 9) {
    if (!(0.0 < t_lo && t_lo < t_hi) || t_hi > e.horizon * (1.0 + 1e-12))
        throw config_error("estimate_lambda1: bad window");
    if (n_nodes < 3) throw config_error("estimate_lambda1: need >= 3 nodes");
    const auto ts = lin_grid(t_lo, t_hi, n_nodes);
    std::vector<double> ys(n_nodes);
    for (std::size_t j = 0; j < n_nodes; ++j) {
        const double s = estimate_survival(e, ts[j]).mean;
        if (!(s > 0.0))
            throw numeric_error("estimate_lambda1: empty survival node; "
                                "more paths or a shorter window needed");
        ys[j] = -std::log(s);
    }
    double tbar = 0.0, ybar = 0.0;
    for (std::size_t j = 0; j < n_nodes; ++j) {
        tbar += ts[j];
        ybar += ys[j];
    }
    tbar /= double(n_nodes);
    ybar /= double(n_nodes);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t j = 0; j < n_nodes; ++j) {
        sxx += (ts[j] - tbar) * (ts[j] - tbar);
        sxy += (ts[j] - tbar) * (ys[j] - ybar);
    }
    const double slope = sxy / sxx;
    double rss = 0.0;
    for (std::size_t j = 0; j < n_nodes; ++j) {
        const double r = ys[j] - ybar - slope * (ts[j] - tbar);
        rss += r * r;
    }
    Lambda1Estimate out;
    out.lambda = slope;
    out.se = n_nodes > 2 ? std::sqrt(rss / double(n_nodes - 2) / sxx) : 0.0;
    out.t_lo = t_lo;
    out.t_hi = t_hi;
    out.n_nodes = n_nodes;
    return out;
}

// Window chosen from the ensemble itself: a crude rate from the median exit
// time puts the fit in the exponential regime whatever lambda1 V^2 turns out
// to be, and the top node is walked down until it keeps enough survivors.
inline Lambda1Estimate estimate_lambda1_auto(const ExitEnsemble& e,
                                             std::size_t n_nodes = 9) {
    if (e.paths.empty()) throw config_error("estimate_lambda1_auto: empty ensemble");
    std::vector<double> taus;
    taus.reserve(e.paths.size());
    for (const auto& p : e.paths) taus.push_back(p.tau);
    const std::size_t mid = taus.size() / 2;
    std::nth_element(taus.begin(), taus.begin() + std::ptrdiff_t(mid), taus.end());
    const double median = std::max(taus[mid], e.horizon * 1e-6);
    double t_hi = std::min(4.5 * median, 0.98 * e.horizon);
    const double enough = std::max(20.0, double(e.paths.size()) / 2000.0);
    for (int k = 0; k < 8; ++k) {
        if (estimate_survival(e, t_hi).mean * double(e.paths.size()) >= enough) break;
        t_hi *= 0.8;
    }
    return estimate_lambda1(e, t_hi / 3.0, t_hi, n_nodes);
}

} // namespace levyhk

// Command-line front end: evaluators, table exports, Monte Carlo estimates,
// and the verification battery.  Every subcommand accepts a config file plus
// individual overrides; outputs go to --out-dir (env LEVYHK_OUT).  The exit
// code is 0 iff every check the invocation ran passed.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "levyhk/config.hpp"
#include "levyhk/report.hpp"
#include "levyhk/runner.hpp"

using namespace levyhk;

namespace {

struct CliState {
    std::string config_path;
    std::string family, domain_text;
    int d = -1;
    double alpha = -1.0, mass = -1.0, eps = -1.0, dt = -1.0;
    long long n_paths = -1, seed = -1;
    std::string out_dir;
    double t = 0.3;
    std::string x_text = "0.2", y_text = "-0.1";

    RunConfig resolve() const {
        RunConfig cfg;
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) throw config_error("cannot open config file: " + config_path);
            cfg = parse_run_config(is);
        }
        if (!family.empty()) cfg.model.family = family_from_name(family);
        if (d > 0) cfg.model.d = d;
        if (alpha > 0.0) cfg.model.alpha = alpha;
        if (mass > 0.0) cfg.model.m = mass;
        if (!domain_text.empty())
            cfg.balls = detail::parse_domain_value(domain_text, cfg.model.d,
                                                   &cfg.domain_kind);
        else if (config_path.empty())
            cfg.balls = {BallSpec{Point::zero(cfg.model.d), 1.0}};
        if (eps > 0.0) cfg.path.eps = eps;
        if (dt > 0.0) cfg.path.dt = dt;
        if (n_paths > 0) cfg.path.n_paths = std::size_t(n_paths);
        if (seed >= 0) cfg.path.seed = std::uint64_t(seed);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        cfg.validate();
        return cfg;
    }

    Point parse_point(const std::string& text, int dim) const {
        std::vector<double> cs;
        std::stringstream ss(text);
        std::string tok;
        while (std::getline(ss, tok, ',')) cs.push_back(std::stod(tok));
        if (int(cs.size()) == 1 && dim > 1) return axis_point(dim, cs[0]);
        if (int(cs.size()) != dim)
            throw config_error("point '" + text + "' does not match dimension " +
                               std::to_string(dim));
        Point p = Point::zero(dim);
        for (int i = 0; i < dim; ++i) p[i] = cs[std::size_t(i)];
        return p;
    }
};

void add_common(CLI::App* cmd, CliState& st) {
    cmd->add_option("--config", st.config_path, "config file (key = value)");
    cmd->add_option("--family", st.family, "stable|relativistic|subordinate_bm|trunc_stable");
    cmd->add_option("--d", st.d, "ambient dimension");
    cmd->add_option("--alpha", st.alpha, "stability index");
    cmd->add_option("--mass", st.mass, "relativistic mass");
    cmd->add_option("--domain", st.domain_text, "'ball R' or 'union c.. R | c.. R'");
    cmd->add_option("--eps", st.eps, "small-jump cutoff");
    cmd->add_option("--dt", st.dt, "time step");
    cmd->add_option("--n-paths", st.n_paths, "Monte Carlo paths");
    cmd->add_option("--seed", st.seed, "RNG seed");
    cmd->add_option("--out-dir", st.out_dir, "output directory")->envname("LEVYHK_OUT");
}

std::filesystem::path ensure_out(const RunConfig& cfg) {
    std::filesystem::path p(cfg.out_dir);
    std::filesystem::create_directories(p);
    return p;
}

void print_estimate(const char* name, const McEstimate& e) {
    nlohmann::json j{{"name", name}, {"mean", e.mean}, {"stderr", e.se}, {"n", e.n},
                     {"seed", e.seed}};
    std::cout << j.dump(2) << "\n";
}

int print_check(const CheckEntry& e) {
    std::cout << to_json(e, true).dump(2) << "\n";
    return e.pass ? 0 : 1;
}

CheckEntry entry_from_band(const std::string& id, const std::string& anchor,
                           const std::string& grid_id, const BandStat& b, bool pass,
                           std::uint64_t seed) {
    return detail::from_band_stat(id, anchor, grid_id, b, pass, seed);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dirichlet heat kernel estimates for pure-jump isotropic "
                 "unimodal processes: evaluators, simulation, verification"};
    app.require_subcommand(1);
    CliState st;

    auto* c_model = app.add_subcommand("model", "export symbol and jump-density tables");
    auto* c_renewal = app.add_subcommand("renewal", "export the renewal function table");
    auto* c_kernel = app.add_subcommand("kernel", "export p and dp/dr matrices");
    auto* c_survival = app.add_subcommand("survival", "estimate P(tau > t)");
    auto* c_pd = app.add_subcommand("pd", "estimate the killed kernel pD(t,x,y)");
    auto* c_grad = app.add_subcommand("grad", "estimate |grad_x pD(t,x,y)|");
    auto* c_lambda1 = app.add_subcommand("lambda1", "estimate the principal eigenvalue");
    auto* c_vhk = app.add_subcommand("verify-hk", "two-sided kernel factorization check");
    auto* c_vmain = app.add_subcommand("verify-main1", "gradient bound check");
    auto* c_viw = app.add_subcommand("verify-iw", "exit-law identity check");
    auto* c_vdiff = app.add_subcommand("verify-diff", "reflection-difference checks");
    auto* c_const = app.add_subcommand("constants", "positivity floors at R in {1/2,1,2}");
    auto* c_all = app.add_subcommand("run-all", "full battery; writes report.json");

    for (auto* c : {c_model, c_renewal, c_kernel, c_survival, c_pd, c_grad, c_lambda1,
                    c_vhk, c_vmain, c_viw, c_vdiff, c_const, c_all})
        add_common(c, st);
    for (auto* c : {c_survival, c_pd, c_grad, c_lambda1, c_viw})
        c->add_option("--t", st.t, "time");
    for (auto* c : {c_pd, c_grad}) {
        c->add_option("--x", st.x_text, "start point, comma-separated");
        c->add_option("--y", st.y_text, "target point, comma-separated");
    }
    c_survival->add_option("--x", st.x_text, "start point, comma-separated");

    CLI11_PARSE(app, argc, argv);

    try {
        const RunConfig cfg = st.resolve();
        const ModelBundle mb(cfg.model);
        const Domain D = cfg.domain();
        const double R = D.delta(Point::zero(cfg.model.d));

        if (c_model->parsed()) {
            const auto out = ensure_out(cfg) / (cfg.model.id() + "-symbols.csv");
            std::ofstream os(out);
            write_symbol_csv(os, mb.sym, mb.nu);
            std::cout << "wrote " << out.string() << "\n";
            return 0;
        }
        if (c_renewal->parsed()) {
            const auto out = ensure_out(cfg) / (cfg.model.id() + "-renewal.csv");
            std::ofstream os(out);
            mb.V.write_csv(os);
            const auto h = estimate_H(mb.V, 1.0);
            std::cout << "wrote " << out.string() << "  (H_1 = " << h.H << ")\n";
            return 0;
        }
        if (c_kernel->parsed()) {
            const auto ts = kernel_time_grid();
            const auto rs = kernel_radius_grid(R);
            const auto dir = ensure_out(cfg);
            {
                std::ofstream os(dir / (cfg.model.id() + "-p.csv"));
                write_grid_csv(os, ts, rs,
                               [&](double t, double r) { return mb.kernel.density(t, r); });
            }
            {
                std::ofstream os(dir / (cfg.model.id() + "-dp_dr.csv"));
                write_grid_csv(os, ts, rs,
                               [&](double t, double r) { return mb.kernel.dp_dr(t, r); });
            }
            std::cout << "wrote " << (dir / (cfg.model.id() + "-p.csv")).string()
                      << " and the dp_dr matrix\n";
            return 0;
        }

        const JumpSampler js(mb.nu, cfg.path);
        if (c_survival->parsed()) {
            const Point x = st.parse_point(st.x_text, cfg.model.d);
            const auto e = simulate_ensemble(js, D, x, st.t, cfg.path);
            print_estimate("survival", estimate_survival(e, st.t));
            return 0;
        }
        if (c_pd->parsed()) {
            const Point x = st.parse_point(st.x_text, cfg.model.d);
            const Point y = st.parse_point(st.y_text, cfg.model.d);
            const auto e = simulate_ensemble(js, D, x, st.t, cfg.path);
            const DensityTable tab = detail::make_path_table(mb, cfg.path, st.t);
            const detail::DirectKernel direct{&mb.kernel};
            print_estimate("pd", estimate_pD(direct, tab, e, st.t, y));
            return 0;
        }
        if (c_grad->parsed()) {
            const Point x = st.parse_point(st.x_text, cfg.model.d);
            const Point y = st.parse_point(st.y_text, cfg.model.d);
            const auto g = estimate_grad_pD(mb, D, st.t, x, y, cfg.path);
            McEstimate e;
            e.mean = g.norm();
            e.se = g.norm_stderr();
            e.n = g.comp[0].n;
            e.seed = cfg.path.seed;
            print_estimate("grad-norm", e);
            return 0;
        }
        if (c_lambda1->parsed()) {
            const double V2 = mb.V.V(R) * mb.V.V(R);
            const auto e =
                simulate_ensemble(js, D, Point::zero(cfg.model.d), 3.0 * V2, cfg.path);
            const auto lam = estimate_lambda1_auto(e);
            McEstimate m;
            m.mean = lam.lambda;
            m.se = lam.se;
            m.n = lam.n_nodes;
            m.seed = cfg.path.seed;
            print_estimate("lambda1", m);
            std::cout << "lambda1 * V^2(R) = " << lam.lambda * V2 << "\n";
            return 0;
        }

        if (c_vhk->parsed()) {
            const auto g = default_grids(mb, R);
            const auto r = check_hk_kula2(mb, R, g.hk_ts, g.hk_xs, g.hk_xs, cfg.path);
            return print_check(entry_from_band(
                "hk_kula2", "pD ~ survival x survival x free kernel", r.grid_id,
                r.ratio, r.pass, cfg.path.seed));
        }
        if (c_vmain->parsed()) {
            const auto g = default_grids(mb, R);
            const auto r = check_main1(mb, D, g.main1_ts, g.main1_ts_large, g.main1_xs,
                                       g.main1_ys, cfg.path);
            auto e = entry_from_band("main1", "|grad pD| <= c bound(t,delta) pD",
                                     r.grid_id, r.ratio, r.pass, cfg.path.seed);
            std::ostringstream os;
            os << "sup=" << r.sup;
            e.diagnostics = os.str();
            return print_check(e);
        }
        if (c_viw->parsed()) {
            if (cfg.model.d != 1) throw config_error("verify-iw needs d = 1");
            PathConfig fine = cfg.path;
            fine.eps = std::min(cfg.path.eps, 0.005);
            fine.dt = std::min(cfg.path.dt, 5e-4);
            const auto r = check_ikeda_watanabe(mb, R, 0.0, st.t, R, 2.0 * R, fine,
                                                Point::zero(1));
            CheckEntry e;
            e.check_id = "iw";
            e.anchor = "exit-law identity";
            e.grid_id = "A:(0,t]-B:(R,2R)";
            e.band_min = r.lhs;
            e.band_median = 0.5 * (r.lhs + r.rhs);
            e.band_max = r.rhs;
            e.ci_lo = r.discrepancy;
            e.ci_hi = r.tolerance;
            e.pass = r.pass;
            e.seed = cfg.path.seed;
            return print_check(e);
        }
        if (c_vdiff->parsed()) {
            int bad = 0;
            const auto g = default_grids(mb, R);
            const Domain ballR = Domain::ball(Point::zero(cfg.model.d), R);
            {
                const auto r = check_key(mb, ballR, g.key_ts, g.key_xs, g.key_ys, cfg.path);
                BandStat b;
                for (const auto& en : r.entries) b.add(en.diff / en.upper, en.se / en.upper);
                bad += print_check(entry_from_band("key", "0 <= diff pD <= diff free",
                                                   r.grid_id, b, r.pass, cfg.path.seed));
            }
            for (double rb : g.lem_rs) {
                const auto r4 = check_lem4(mb, rb, g.lem_ts, lem_x1s(rb),
                                           lem4_ys(cfg.model.d, rb), cfg.path);
                bad += print_check(entry_from_band("lem4", "diff ratio, inner x",
                                                   r4.grid_id, r4.ratio, r4.pass,
                                                   cfg.path.seed));
                const auto r3 = check_lem3(mb, rb, g.lem_ts, lem_x1s(rb),
                                           lem3_ys(cfg.model.d, rb), cfg.path);
                bad += print_check(entry_from_band("lem3", "diff ratio, inner y",
                                                   r3.grid_id, r3.ratio, r3.pass,
                                                   cfg.path.seed));
                const auto r5 = check_lem5(mb, rb, g.lem_ts, lem_x1s(rb),
                                           lem5_ys(cfg.model.d, rb), cfg.path);
                bad += print_check(entry_from_band("lem5", "diff ratio, outer y",
                                                   r5.grid_id, r5.ratio, r5.pass,
                                                   cfg.path.seed));
            }
            {
                ModelSpec s2 = cfg.model;
                s2.d = 2;
                const LevyDensity nu2(s2);
                const auto q = check_ABLevyquotient(nu2, {0.2, 1.0, 3.0},
                                                    {0.0, 0.1, 0.5, 2.0}, {0.0, 0.3, 1.5});
                CheckEntry e;
                e.check_id = "ABLevyquotient";
                e.anchor = "jump-intensity difference quotient bound";
                e.grid_id = q.grid_id;
                e.band_max = e.band_median = q.sup;
                e.pass = q.pass;
                bad += print_check(e);
            }
            return bad ? 1 : 0;
        }
        if (c_const->parsed()) {
            bool ok = true;
            for (double r : {0.5, 1.0, 2.0}) {
                const auto c = estimate_appendix_constants(mb, r);
                nlohmann::json j{{"R", r},
                                 {"psi_ratio_floor", c.psi_ratio_floor},
                                 {"near_diag_floor", c.near_diag_floor},
                                 {"small_time_floor", c.small_time_floor},
                                 {"levy_product_floor", c.levy_product_floor},
                                 {"annulus_floor", c.annulus_floor},
                                 {"all_positive", c.all_positive}};
                std::cout << j.dump(2) << "\n";
                ok = ok && c.all_positive;
            }
            return ok ? 0 : 1;
        }
        if (c_all->parsed()) {
            const VerificationReport rep = run_all(cfg);
            const auto dir = ensure_out(cfg);
            {
                std::ofstream os(dir / "report.json");
                os << to_json(rep, true).dump(2) << "\n";
            }
            {
                std::ofstream os(dir / (cfg.model.id() + "-symbols.csv"));
                write_symbol_csv(os, mb.sym, mb.nu);
            }
            {
                std::ofstream os(dir / (cfg.model.id() + "-renewal.csv"));
                mb.V.write_csv(os);
            }
            {
                std::ofstream os(dir / "config-used.txt");
                cfg.write(os);
            }
            std::size_t n_pass = 0;
            for (const auto& c : rep.checks) {
                std::printf("%-22s %s  band[%.4g, %.4g, %.4g]%s%s\n", c.check_id.c_str(),
                            c.pass ? "PASS" : "FAIL", c.band_min, c.band_median,
                            c.band_max, c.diagnostics.empty() ? "" : "  ",
                            c.diagnostics.c_str());
                n_pass += c.pass;
            }
            std::printf("%zu/%zu checks passed; report at %s\n", n_pass,
                        rep.checks.size(), (dir / "report.json").string().c_str());
            return rep.all_pass() ? 0 : 1;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 0;
}

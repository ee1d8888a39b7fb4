#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "levyhk/verify.hpp"

using namespace levyhk;

namespace {

const ModelSpec CAUCHY1{Family::Stable, 1, 1.0, 0.0, "one"};
const ModelSpec CAUCHY2{Family::Stable, 2, 1.0, 0.0, "one"};

const ModelBundle& bundle1() {
    static ModelBundle mb(CAUCHY1);
    return mb;
}
const ModelBundle& bundle2() {
    static ModelBundle mb(CAUCHY2);
    return mb;
}

} // namespace

TEST_CASE("band statistics track extremes, median and the widest envelope") {
    BandStat b;
    b.add(1.0, 0.1);
    b.add(3.0, 0.2);
    b.add(2.0, 0.05);
    CHECK(b.min == 1.0);
    CHECK(b.max == 3.0);
    CHECK(b.median() == 2.0);
    CHECK(b.ci_lo == Catch::Approx(0.7));
    CHECK(b.ci_hi == Catch::Approx(3.6));
    CHECK(b.positive());
    CHECK(b.bounded());
}

TEST_CASE("two-sided factorization band is tight on the unit ball") {
    const auto& mb = bundle1();
    PathConfig cfg;
    const double V2 = mb.V.V(1.0) * mb.V.V(1.0);
    const std::vector<double> ts{0.15 * V2, 0.45 * V2, 0.9 * V2};
    const std::vector<Point> xs{axis_point(1, -0.5), axis_point(1, 0.0),
                                axis_point(1, 0.5)};
    const auto r = check_hk_kula2(mb, 1.0, ts, xs, xs, cfg);
    CHECK(r.pass);
    CHECK(r.n_flagged == 0);
    // measured band [1.14, 2.58] at this seed; the gate leaves seed room
    CHECK(r.ratio.min > 0.5);
    CHECK(r.ratio.max < 6.0);
    CHECK(r.ratio.ci_lo > 0.3);
    CHECK(r.profile.min > 0.7);
    CHECK(r.profile.max < 2.0);
    CHECK(r.lam.lambda > 1.0);
    CHECK(r.lam.lambda < 1.3);
    CHECK_THROWS_AS(check_hk_kula2(mb, 1.0, {}, xs, xs, cfg), config_error);
}

TEST_CASE("gradient ratio stays below one and matches the closed-form bound") {
    const auto& mb = bundle1();
    PathConfig cfg;
    const Domain D = Domain::ball(Point::zero(1), 1.0);
    const std::vector<double> ts{0.1, 0.3, 1.0}, tl{1.0, 1.8};
    const std::vector<Point> xs{axis_point(1, 0.2), axis_point(1, 0.5),
                                axis_point(1, 0.8)};
    const std::vector<Point> ys{axis_point(1, -0.4), axis_point(1, 0.0),
                                axis_point(1, 0.4)};
    const auto r = check_main1(mb, D, ts, tl, xs, ys, cfg);
    CHECK(r.pass);
    // measured sup 0.908: the bound holds with constant about 1 on this grid
    CHECK(r.sup > 0.5);
    CHECK(r.sup < 1.5);
    CHECK(r.ratio.min > 0.05);
    CHECK(r.ratio_large_t.max < 2.0);
    REQUIRE(r.formula_checked);
    // for this family the general and closed-form bounds coincide exactly
    CHECK(std::abs(r.formula_lo - 1.0) < 1e-12);
    CHECK(std::abs(r.formula_hi - 1.0) < 1e-12);
    CHECK(r.n_flagged == 0);
}

TEST_CASE("gradient step must stay well inside the domain") {
    const auto& mb = bundle1();
    PathConfig cfg;
    cfg.n_paths = 100;
    const Domain D = Domain::ball(Point::zero(1), 1.0);
    CHECK_THROWS_AS(
        estimate_grad_pD(mb, D, 0.3, axis_point(1, 0.4), Point::zero(1), cfg, 2.0),
        config_error);
}

TEST_CASE("exit-law identity closes within its error budget") {
    const auto& mb = bundle1();
    PathConfig cfg;
    cfg.eps = 0.005;
    cfg.dt = 5e-4;
    const auto r = check_ikeda_watanabe(mb, 1.0, 0.0, 0.5, 1.0, 2.0, cfg,
                                        Point::zero(1), 6, 16);
    CHECK(r.pass);
    CHECK(r.lhs > 0.05);
    CHECK(r.lhs < 0.2);
    CHECK(r.boundary_mass < 1e-3);
    CHECK(r.discrepancy <= r.tolerance);
    CHECK_THROWS_AS(check_ikeda_watanabe(mb, 1.0, 0.5, 0.2, 1.0, 2.0, cfg,
                                         Point::zero(1)),
                    config_error);
    CHECK_THROWS_AS(check_ikeda_watanabe(bundle2(), 1.0, 0.0, 0.5, 1.0, 2.0, cfg,
                                         make_point({0.0, 0.0})),
                    config_error);
}

TEST_CASE("reflection sandwich holds at every node") {
    const auto& mb = bundle1();
    PathConfig cfg;
    const Domain D = Domain::ball(Point::zero(1), 1.0);
    const auto r = check_key(mb, D, {0.1, 0.5}, {axis_point(1, 0.3), axis_point(1, 0.5)},
                             {axis_point(1, 0.2), axis_point(1, 0.6)}, cfg);
    CHECK(r.pass);
    CHECK(r.n == 8);
    for (const auto& e : r.entries) {
        CHECK(e.diff >= -3.0 * e.se);
        CHECK(e.diff <= e.upper + 3.0 * e.se);
        CHECK(e.upper > 0.0);
    }
    CHECK_THROWS_AS(check_key(mb, D, {0.1}, {axis_point(1, -0.3)},
                              {axis_point(1, 0.2)}, cfg),
                    config_error);
}

TEST_CASE("difference ratio lemmas are finite with order-one constants in d = 2") {
    const auto& mb = bundle2();
    PathConfig cfg;
    const std::vector<double> ts{0.05, 0.2, 0.5};
    const std::vector<double> x1s{1.0 / 64.0, 1.0 / 24.0};

    const auto r4 = check_lem4(mb, 1.0, ts, x1s,
                               {make_point({0.3, 0.0}), make_point({0.1, 0.2}),
                                make_point({0.6, 0.3})},
                               cfg);
    CHECK(r4.pass);
    CHECK(r4.n_negative == 0);
    CHECK(r4.sup > 0.3);  // measured 1.01
    CHECK(r4.sup < 2.5);

    const auto r3 = check_lem3(mb, 1.0, ts, x1s,
                               {make_point({0.1, 0.0}), make_point({0.15, 0.1}),
                                make_point({0.2, 0.05})},
                               cfg);
    CHECK(r3.pass);
    CHECK(r3.sup > 0.5);  // measured 2.25
    CHECK(r3.sup < 5.0);

    const auto r5 = check_lem5(mb, 1.0, ts, x1s,
                               {make_point({0.3, 0.0}), make_point({0.5, 0.2}),
                                make_point({0.2, 0.25})},
                               cfg);
    CHECK(r5.pass);
    CHECK(r5.sup > 2.0);  // measured 8.40
    CHECK(r5.sup < 16.0);
}

TEST_CASE("lemma hypotheses on the grids are enforced") {
    const auto& mb = bundle2();
    PathConfig cfg;
    cfg.n_paths = 100;
    // x too far out
    CHECK_THROWS_AS(check_lem4(mb, 1.0, {0.1}, {0.2}, {make_point({0.3, 0.0})}, cfg),
                    config_error);
    // y outside the inner quarter-ball
    CHECK_THROWS_AS(check_lem3(mb, 1.0, {0.1}, {0.01}, {make_point({0.5, 0.0})}, cfg),
                    config_error);
    // y inside the inner quarter-ball
    CHECK_THROWS_AS(check_lem5(mb, 1.0, {0.1}, {0.01}, {make_point({0.1, 0.0})}, cfg),
                    config_error);
}

TEST_CASE("difference estimate extends to a symmetric union of balls") {
    const auto& mb = bundle2();
    PathConfig cfg;
    const Domain U = Domain::symmetric_union({BallSpec{make_point({0.6, 0.0}), 0.8},
                                              BallSpec{make_point({-0.6, 0.0}), 0.8}});
    const auto r = check_m_estimate(mb, U, {0.05, 0.2, 0.5}, {0.006, 0.01},
                                    {make_point({0.4, 0.0}), make_point({0.8, 0.2})},
                                    cfg);
    CHECK(r.pass);
    CHECK(r.n_negative == 0);
    CHECK(r.sup > 0.3);  // measured 0.91
    CHECK(r.sup < 2.5);
}

TEST_CASE("jump-intensity reflection difference: sign, domination, quotient bound") {
    const LevyDensity nu(CAUCHY2);
    // z on the reflection hyperplane: both distances agree, the difference is 0
    CHECK(nu_tilde(nu, make_point({1.0, 0.0}), make_point({0.0, 0.7})) == 0.0);
    CHECK_THROWS_AS(nu_tilde(nu, make_point({1.0, 0.0}), make_point({1.0, 0.0})),
                    std::invalid_argument);

    const auto q = check_ABLevyquotient(nu, {0.2, 1.0, 3.0}, {0.0, 0.1, 0.5, 2.0},
                                        {0.0, 0.3, 1.5});
    CHECK(q.pass);
    CHECK(q.nonneg_ok);
    CHECK(q.dominated_ok);
    CHECK(q.sup > 0.2);          // measured 0.916
    CHECK(q.sup <= 1.0 + 1e-12); // the quotient bound holds with its stated constant
    CHECK(q.n == 36);

    const LevyDensity nu1(CAUCHY1);
    CHECK_THROWS_AS(check_ABLevyquotient(nu1, {1.0}, {0.5}, {0.0}), config_error);
}

TEST_CASE("positivity floors are exact where closed forms exist") {
    const auto c = estimate_appendix_constants(bundle1(), 1.0);
    CHECK(c.all_positive);
    // scale invariance of the symbol makes the frequency-ratio floor exactly 1
    CHECK(std::abs(c.psi_ratio_floor - 1.0) < 1e-12);
    // nu(r) V^2(r) r = (1/(pi r^2)) (4r/pi) r = 4/pi^2, constant in r
    CHECK(std::abs(c.levy_product_floor - 4.0 / (PI * PI)) < 2e-3);
    CHECK(c.near_diag_floor > 0.1);
    CHECK(c.small_time_floor > 0.05);
    CHECK(c.annulus_floor > 0.1);

    const auto c2 = estimate_appendix_constants(bundle1(), 2.0);
    CHECK(c2.all_positive);
    CHECK_THROWS_AS(estimate_appendix_constants(bundle1(), -1.0), config_error);
}

TEST_CASE("positivity floors hold for the relativistic model") {
    const ModelSpec rel{Family::Relativistic, 1, 1.0, 1.0, "one"};
    const ModelBundle mb(rel);
    const auto c = estimate_appendix_constants(mb, 1.0);
    CHECK(c.all_positive);
    CHECK(c.psi_ratio_floor > 0.0);
    CHECK(c.psi_ratio_floor <= 1.0 + 1e-12);
}

TEST_CASE("killed kernel grows with the domain and stays under the free kernel") {
    const auto& mb = bundle1();
    PathConfig cfg;
    cfg.n_paths = 8000;
    const auto r = check_domain_monotonicity(mb, 0.7, 1.4, 0.3, axis_point(1, 0.2),
                                             axis_point(1, -0.1), cfg);
    CHECK(r.pass);
    CHECK(r.pd_small < r.pd_big + 3.0 * std::hypot(r.se_small, r.se_big));
    CHECK(r.pd_big < r.free_kernel + 3.0 * r.se_big);
    CHECK_THROWS_AS(check_domain_monotonicity(mb, 1.4, 0.7, 0.3, axis_point(1, 0.2),
                                              axis_point(1, -0.1), cfg),
                    config_error);
}

TEST_CASE("killed semigroup composes over intermediate times") {
    const auto& mb = bundle1();
    PathConfig cfg;
    const auto r = check_semigroup(mb, 1.0, 0.2, 0.3, axis_point(1, 0.1),
                                   axis_point(1, -0.2), cfg);
    CHECK(r.pass);
    CHECK(std::abs(r.lhs - r.rhs) < 0.03 * r.lhs);
    CHECK_THROWS_AS(check_semigroup(bundle2(), 1.0, 0.2, 0.3, make_point({0.1, 0.0}),
                                    make_point({-0.2, 0.0}), cfg),
                    config_error);
}

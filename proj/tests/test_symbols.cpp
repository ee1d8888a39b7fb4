#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "levyhk/model.hpp"

using namespace levyhk;

namespace {

const SymbolEvaluator& trunc_sym_d1() {
    static SymbolEvaluator s({Family::TruncStableExp, 1, 0.7, 1.0, "one"});
    return s;
}

} // namespace

TEST_CASE("stable closed forms") {
    // radial density coefficients pinned by Gamma-function identities
    CHECK(stable_density_coeff(1, 1.0) == Catch::Approx(1.0 / PI).epsilon(1e-14));
    CHECK(stable_density_coeff(2, 1.0) == Catch::Approx(1.0 / (2.0 * PI)).epsilon(1e-14));

    SymbolEvaluator sym({Family::Stable, 1, 1.3, 1.0, "one"});
    CHECK(sym.psi(2.0) == Catch::Approx(std::pow(2.0, 1.3)).epsilon(1e-14));

    LevyDensity nu({Family::Stable, 1, 1.0, 1.0, "one"});
    CHECK(nu(1.0) == Catch::Approx(1.0 / PI).epsilon(1e-14));
    CHECK(nu.prime(1.0) == Catch::Approx(-2.0 / PI).epsilon(1e-14));
    CHECK(nu.tail_mass(2.0) == Catch::Approx(1.0 / PI).epsilon(1e-12));
    CHECK(nu.small_ball_second_moment(0.5) ==
          Catch::Approx((2.0 / PI) * 0.5).epsilon(1e-12));
}

TEST_CASE("relativistic symbol is cancellation-free near zero") {
    SymbolEvaluator sym({Family::Relativistic, 1, 1.0, 1.0, "one"});
    CHECK(sym.psi(1.0) == Catch::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-15));
    CHECK(sym.psi(1e-8) == Catch::Approx(0.5e-16).epsilon(1e-10));
    CHECK(sym.psi(0.0) == 0.0);
    // psi(s) ~ s for s >> m
    CHECK(sym.psi(1e6) == Catch::Approx(1e6 - 1.0).epsilon(1e-9));
}

TEST_CASE("subordinate BM with unit slowly-varying factor reproduces the stable family") {
    for (double alpha : {0.7, 1.5}) {
        for (int d : {1, 2}) {
            ModelSpec spec{Family::SubordinateBM, d, alpha, 1.0, "one"};
            SymbolEvaluator sym(spec);
            SymbolEvaluator stab({Family::Stable, d, alpha, 1.0, "one"});
            for (double s : {0.01, 1.0, 30.0})
                CHECK(sym.psi(s) == Catch::Approx(stab.psi(s)).epsilon(1e-13));

            // the subordination quadrature is an independent route to nu
            LevyDensity nu(spec);
            LevyDensity nust({Family::Stable, d, alpha, 1.0, "one"});
            for (double r : {0.1, 1.0, 7.0}) {
                INFO("d=" << d << " alpha=" << alpha << " r=" << r);
                CHECK(nu(r) == Catch::Approx(nust(r)).epsilon(1e-9));
                CHECK(nu.prime(r) == Catch::Approx(nust.prime(r)).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("relativistic density: derivative consistency and small-r limit") {
    LevyDensity nu({Family::Relativistic, 2, 1.0, 1.5, "one"});
    for (double r : {0.3, 1.0, 4.0}) {
        const double h = 1e-5 * r;
        const double fd = (nu(r + h) - nu(r - h)) / (2.0 * h);
        CHECK(nu.prime(r) == Catch::Approx(fd).epsilon(1e-6));
        CHECK(nu(r) > 0.0);
        CHECK(nu.prime(r) < 0.0);
    }
    // near zero the density approaches the 1-stable closed form
    LevyDensity nust({Family::Stable, 2, 1.0, 1.0, "one"});
    const double ratio = nu(1e-4) / nust(1e-4);
    CHECK(ratio == Catch::Approx(1.0).margin(0.01));
}

TEST_CASE("truncated family: C^1 match at the cut and tail closed form") {
    LevyDensity nu({Family::TruncStableExp, 1, 0.7, 1.0, "one"});
    const double eps = 1e-12;
    CHECK(nu(1.0 - eps) == Catch::Approx(nu(1.0 + eps)).epsilon(1e-9));
    CHECK(nu.prime(1.0 - eps) == Catch::Approx(nu.prime(1.0 + eps)).epsilon(1e-9));
    // tail formula vs the generic quadrature route through a stable shim
    const double direct = nu.tail_mass(0.5);
    const double split = nu.tail_mass(1.0) +
        2.0 * adaptive_gk([&nu](double s) { return nu(s); }, 0.5, 1.0, 1e-12).value;
    CHECK(direct == Catch::Approx(split).epsilon(1e-9));
}

TEST_CASE("truncated symbol: independent 1-d assembly and route agreement") {
    const auto& sym = trunc_sym_d1();
    const int d = 1;
    const double alpha = 0.7;
    const double A = stable_density_coeff(d, alpha);
    const double c2 = d + alpha, c1 = A * std::exp(c2);

    auto oracle = [&](double s) {
        const double head = tanh_sinh([&](double rho) {
            return (1.0 - std::cos(s * rho)) * std::pow(rho, -1.0 - alpha);
        }, 0.0, 1.0, 1e-13).value;
        const double total = std::exp(-c2) / c2;
        // Int_1^inf e^{-c2 rho} cos(s rho) drho = e^{-c2}(c2 cos s - s sin s)/(c2^2+s^2)
        const double osc = std::exp(-c2) * (c2 * std::cos(s) - s * std::sin(s)) /
                           (c2 * c2 + s * s);
        return 2.0 * (A * head + c1 * (total - osc));
    };

    // compare at cache-grid points so the lookup reproduces the assembled
    // values exactly and the check isolates the assembly itself
    for (int node : {300, 332, 356, 372}) {
        const double s = std::pow(10.0, node / 40.0 - 8.0);
        INFO("s=" << s);
        CHECK(sym.psi(s) == Catch::Approx(oracle(s)).epsilon(5e-8));
    }
}

TEST_CASE("truncated symbol: direct and tail-identity routes agree on overlap") {
    detail::TruncSymbol ts(2, 1.0);
    for (double s : {0.7, 0.9, 1.1, 1.5, 3.0}) {
        INFO("s=" << s);
        CHECK(ts.direct(s) == Catch::Approx(ts.via_tail(s)).epsilon(1e-8));
    }
    // the cache reproduces its own grid values exactly
    for (int node : {80, 340, 560}) {
        const double s = std::pow(10.0, node / 40.0 - 8.0);
        CHECK(ts.value(s) == Catch::Approx(ts.value_exact(s)).epsilon(1e-12));
    }
    // off-grid lookups interpolate; the symbol carries genuine unit-wavelength
    // ripples from the jump cutoff, so mid-range accuracy is resolution-bound
    auto interp_tol = [](double s) {
        if (s < 2e-2) return 2e-7;
        if (s < 50.0) return 1e-5;
        return 5e-7;
    };
    for (double s : {3.7e-3, 0.83, 17.9, 4.1e4}) {
        INFO("s=" << s);
        CHECK(ts.value(s) == Catch::Approx(ts.value_exact(s)).epsilon(interp_tol(s)));
    }
}

TEST_CASE("psi <= psi_star <= pi^2 psi on a shared log grid, all four families") {
    std::vector<ModelSpec> models = {
        {Family::Stable, 1, 1.0, 1.0, "one"},
        {Family::Relativistic, 1, 1.0, 1.0, "one"},
        {Family::SubordinateBM, 2, 1.2, 1.0, "one"},
        {Family::TruncStableExp, 1, 0.7, 1.0, "one"},
    };
    for (const auto& spec : models) {
        SymbolEvaluator sym(spec);
        double prev_star = 0.0;
        for (double r : log_grid(1e-3, 1e3, 61)) {
            const double p = sym.psi(r), ps = sym.psi_star(r);
            INFO(spec.id() << " r=" << r);
            CHECK(ps >= p * (1.0 - 1e-12));
            CHECK(ps <= PI * PI * p * (1.0 + 1e-12));
            CHECK(ps >= prev_star * (1.0 - 1e-12));
            prev_star = ps;
        }
    }
}

TEST_CASE("generalized inverse of psi_star") {
    SymbolEvaluator cauchy({Family::Stable, 1, 1.0, 1.0, "one"});
    CHECK(cauchy.psi_inv(9.0) == Catch::Approx(9.0).epsilon(1e-10));
    CHECK(cauchy.psi_inv(0.0) == 0.0);
    CHECK(std::isinf(cauchy.psi_inv(1e40)));

    SymbolEvaluator half({Family::Stable, 1, 0.5, 1.0, "one"});
    CHECK(half.psi_inv(3.0) == Catch::Approx(9.0).epsilon(1e-10));

    SymbolEvaluator rel({Family::Relativistic, 1, 1.0, 1.0, "one"});
    for (double r : {1e-3, 0.3, 2.0, 50.0}) {
        const double u = rel.psi_star(r);
        CHECK(rel.psi_inv(u) <= r * (1.0 + 1e-9));
        CHECK(rel.psi_star(rel.psi_inv(u)) >= u * (1.0 - 1e-9));
    }
    const auto& tr = trunc_sym_d1();
    for (double u : {1e-2, 1.0, 40.0, 4e3}) {
        const double y = tr.psi_inv(u);
        CHECK(tr.psi_star(y) >= u * (1.0 - 1e-8));
        CHECK(tr.psi_star(y * 0.999) <= u * (1.0 + 1e-6));
    }
}

TEST_CASE("scaling certificates") {
    SymbolEvaluator stab({Family::Stable, 1, 1.5, 1.0, "one"});
    const auto cs = estimate_scaling(stab);
    CHECK(cs.C_lower == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(cs.C_upper == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(cs.n_points == 625);

    SymbolEvaluator rel({Family::Relativistic, 1, 1.0, 1.0, "one"});
    const auto cr = estimate_scaling(rel);
    CHECK(cr.alpha_lower == 1.0);
    CHECK(cr.C_lower > 0.9);
    CHECK(cr.C_lower <= 1.0 + 1e-12);
    CHECK(cr.C_upper >= 1.0);
    CHECK(cr.C_upper < 3.0);

    const auto ct = estimate_scaling(trunc_sym_d1());
    CHECK(ct.C_lower > 0.2);
    CHECK(ct.C_upper < 5.0);

    CHECK_THROWS_AS(estimate_scaling(stab, 1.0, 1.0, 0.5, {}, {1.0}), config_error);
    CHECK_THROWS_AS(estimate_scaling(stab, 1.0, 1.0, 10.0, {2.0}, {1.0}), config_error);
}

TEST_CASE("model validation") {
    CHECK_THROWS_AS(SymbolEvaluator({Family::Stable, 0, 1.0, 1.0, "one"}), config_error);
    CHECK_THROWS_AS(SymbolEvaluator({Family::Stable, 1, 2.0, 1.0, "one"}), config_error);
    CHECK_THROWS_AS(SymbolEvaluator({Family::Relativistic, 1, 1.0, 0.0, "one"}), config_error);
    CHECK_THROWS_AS(SymbolEvaluator({Family::SubordinateBM, 1, 1.0, 1.0, "log"}), config_error);
    CHECK(ModelSpec{Family::Relativistic, 2, 1.0, 0.5, "one"}.id() == "relativistic-d2-m0.5");
    CHECK(family_from_name("trunc_stable") == Family::TruncStableExp);
    CHECK_THROWS_AS(family_from_name("gaussian"), config_error);
}

TEST_CASE("tail ratio evidence") {
    LevyDensity nu({Family::Stable, 1, 1.0, 1.0, "one"});
    const double a = nu.tail_ratio_a();
    CHECK(a >= 4.0);
    CHECK(a <= 4.41);
    for (double r : log_grid(1.0, 100.0, 40))
        CHECK(nu(r) <= a * nu(r + 1.0));

    LevyDensity rel({Family::Relativistic, 1, 1.0, 1.0, "one"});
    const double ar = rel.tail_ratio_a();
    CHECK(ar > 1.0);
    CHECK(std::isfinite(ar));
    for (double r : log_grid(1.0, 100.0, 40))
        CHECK(rel(r) <= ar * rel(r + 1.0));
}

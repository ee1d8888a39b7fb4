#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "levyhk/config.hpp"
#include "levyhk/report.hpp"
#include "levyhk/runner.hpp"

using namespace levyhk;

namespace {

RunConfig light_config(std::uint64_t seed) {
    RunConfig cfg;
    cfg.model = ModelSpec{Family::Stable, 1, 1.0, 0.0, "one"};
    cfg.path.n_paths = 4000;
    cfg.path.seed = seed;
    return cfg;
}

VerificationReport tiny_report() {
    VerificationReport r;
    r.model_id = "stable-a1.0-d1";
    r.domain_id = "ball-R1";
    r.seed = 11;
    r.increment_constants = {{0.5, 1.25}, {1.0, 1.5}};
    CheckEntry c;
    c.check_id = "demo";
    c.anchor = "a <= b";
    c.grid_id = "t:{1}";
    c.band_min = 0.5;
    c.band_median = 1.0;
    c.band_max = 2.0;
    c.ci_lo = 0.4;
    c.ci_hi = 2.2;
    c.pass = true;
    c.seed = 11;
    c.runtime_sec = 0.125;
    r.checks.push_back(c);
    c.check_id = "demo2";
    c.pass = false;
    c.diagnostics = "went sideways";
    r.checks.push_back(c);
    r.estimates.push_back({"lambda1", 1.15, 0.01, 4000, 11});
    return r;
}

} // namespace

TEST_CASE("config text round-trips through the parser") {
    RunConfig cfg;
    cfg.model = ModelSpec{Family::Relativistic, 2, 1.0, 1.5, "one"};
    cfg.domain_kind = DomainKind::SymmetricUnionOfBalls;
    cfg.balls = {BallSpec{make_point({0.6, 0.0}), 0.8},
                 BallSpec{make_point({-0.6, 0.0}), 0.8}};
    cfg.path.eps = 0.01;
    cfg.path.dt = 5e-4;
    cfg.path.n_paths = 1234;
    cfg.path.seed = 99;
    cfg.path.substitute_gaussian = false;
    cfg.grids = "default";
    cfg.out_dir = "elsewhere";

    const RunConfig back = parse_run_config(cfg.str());
    CHECK(back.str() == cfg.str());
    CHECK(back.model.family == Family::Relativistic);
    CHECK(back.model.m == 1.5);
    CHECK(back.domain_kind == DomainKind::SymmetricUnionOfBalls);
    REQUIRE(back.balls.size() == 2);
    CHECK(back.balls[1].center[0] == -0.6);
    CHECK(back.path.n_paths == 1234);
    CHECK_FALSE(back.path.substitute_gaussian);
    CHECK(back.out_dir == "elsewhere");
}

TEST_CASE("config parser tolerates comments and fills defaults") {
    const RunConfig cfg = parse_run_config(
        "# minimal run\nfamily = stable   # four families\n d = 1 \nalpha = 0.5\n");
    CHECK(cfg.model.alpha == 0.5);
    CHECK(cfg.domain_kind == DomainKind::Ball);
    REQUIRE(cfg.balls.size() == 1);
    CHECK(cfg.balls[0].radius == 1.0);
    CHECK(cfg.path.eps == 0.05);
    CHECK(cfg.path.n_paths == 20000);
    CHECK(cfg.path.seed == 1);
    CHECK(cfg.path.substitute_gaussian);
    CHECK(cfg.report_version == std::string(RunConfig::REPORT_VERSION));
}

TEST_CASE("config parser rejects malformed input") {
    CHECK_THROWS_AS(parse_run_config("familly = stable\n"), config_error);
    CHECK_THROWS_AS(parse_run_config("family stable\n"), config_error);
    CHECK_THROWS_AS(parse_run_config("family =\n"), config_error);
    CHECK_THROWS_AS(parse_run_config("alpha = fast\n"), config_error);
    CHECK_THROWS_AS(parse_run_config("gaussian = yes\n"), config_error);
    CHECK_THROWS_AS(parse_run_config("domain = square 1\n"), config_error);
    CHECK_THROWS_AS(parse_run_config("domain = ball\n"), config_error);
    CHECK_THROWS_AS(parse_run_config("domain = ball 1 2\n"), config_error);
    CHECK_THROWS_AS(parse_run_config("d = 2\ndomain = union 0 1\n"), config_error);
    CHECK_THROWS_AS(parse_run_config("domain = union\n"), config_error);
    CHECK_THROWS_AS(parse_run_config("report_version = levyhk-report-v0\n"),
                    config_error);
    CHECK_THROWS_AS(parse_run_config("family = stable\nalpha = 2.5\n"), config_error);
}

TEST_CASE("config validation catches model-domain dimension mismatch") {
    RunConfig cfg;
    cfg.model = ModelSpec{Family::Stable, 2, 1.0, 0.0, "one"};
    cfg.balls = {BallSpec{Point::zero(1), 1.0}};
    CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("report round-trips through JSON with strict field checking") {
    const VerificationReport r = tiny_report();
    const VerificationReport back = parse_report(to_json(r).dump());
    CHECK(back.schema == std::string(REPORT_SCHEMA));
    CHECK(back.model_id == r.model_id);
    CHECK(back.domain_id == r.domain_id);
    CHECK(back.seed == 11);
    REQUIRE(back.increment_constants.size() == 2);
    CHECK(back.increment_constants[1].H == 1.5);
    REQUIRE(back.checks.size() == 2);
    CHECK(back.checks[0].band_median == 1.0);
    CHECK(back.checks[0].runtime_sec == 0.125);
    CHECK(back.checks[1].diagnostics == "went sideways");
    CHECK_FALSE(back.all_pass());
    REQUIRE(back.find("demo2") != nullptr);
    CHECK(back.find("demo2")->pass == false);
    CHECK(back.find("absent") == nullptr);
    REQUIRE(back.estimates.size() == 1);
    CHECK(back.estimates[0].stderr_ == 0.01);

    // the canonical payload drops runtimes but keeps everything else
    const VerificationReport canon = parse_report(canonical_payload(r));
    CHECK(canon.checks[0].runtime_sec == 0.0);
    CHECK(canon.checks[0].band_min == 0.5);
}

TEST_CASE("report reader rejects tampered payloads") {
    const nlohmann::json good = to_json(tiny_report());

    auto j = good;
    j["extra"] = 1;
    CHECK_THROWS_AS(report_from_json(j), config_error);

    j = good;
    j.erase("seed");
    CHECK_THROWS_AS(report_from_json(j), config_error);

    j = good;
    j["schema"] = "levyhk-report-v2";
    CHECK_THROWS_AS(report_from_json(j), config_error);

    j = good;
    j["checks"][0].erase("pass");
    CHECK_THROWS_AS(report_from_json(j), config_error);

    j = good;
    j["checks"][0]["band"].erase("max");
    CHECK_THROWS_AS(report_from_json(j), config_error);

    j = good;
    j["checks"][0]["note"] = "hi";
    CHECK_THROWS_AS(report_from_json(j), config_error);

    j = good;
    j["estimates"][0]["unit"] = "1/s";
    CHECK_THROWS_AS(report_from_json(j), config_error);

    j = good;
    j["increment_constants"][0].erase("H");
    CHECK_THROWS_AS(report_from_json(j), config_error);
}

TEST_CASE("full battery runs every check once and is reproducible") {
    const VerificationReport a = run_all(light_config(1));
    const VerificationReport b = run_all(light_config(1));
    const VerificationReport c = run_all(light_config(7));

    const std::vector<std::string> expected{
        "scaling",       "psi-star",       "nu-estimates", "V-psi",
        "V-scaling",     "V-increment",    "kernel-upper", "kernel-lower",
        "kernel-comparability", "kernel-p0", "derestimate", "kernel-grad",
        "lem1",          "hk_kula2",       "survival-profile", "lambda1-bracket",
        "main1",         "iw",             "domain-monotonicity", "semigroup",
        "key",           "lem4-r0.5",      "lem3-r0.5",    "lem5-r0.5",
        "lem4-r1.0",     "lem3-r1.0",      "lem5-r1.0",    "m_estimate",
        "ABLevyquotient", "constants"};
    REQUIRE(a.checks.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i)
        CHECK(a.checks[i].check_id == expected[i]);

    CHECK(a.all_pass());
    for (const auto& e : a.checks) {
        INFO(e.check_id << ": " << e.diagnostics);
        CHECK(e.pass);
    }

    REQUIRE(a.increment_constants.size() == 3);
    for (const auto& h : a.increment_constants) CHECK(h.H >= 1.0);

    bool has_lambda1 = false, has_levy_floor = false;
    for (const auto& e : a.estimates) {
        if (e.name == "lambda1") has_lambda1 = true;
        if (e.name == "levy-product-floor") has_levy_floor = true;
    }
    CHECK(has_lambda1);
    CHECK(has_levy_floor);

    CHECK(canonical_payload(a) == canonical_payload(b));
    CHECK(canonical_payload(a) != canonical_payload(c));
}

#pragma once

// Consolidated run report: ratio-band entries per check, point estimates, and
// the renewal increment constants, serialized as versioned JSON.  Read-back is
// strict: unknown or missing fields are rejected, so stale reports cannot be
// mistaken for current ones.  The canonical payload excludes runtimes and is
// byte-identical across runs with the same config and seed.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "common.hpp"
#include "model.hpp"
#include "renewal.hpp"

namespace levyhk {

inline constexpr const char* REPORT_SCHEMA = "levyhk-report-v1";

struct CheckEntry {
    std::string check_id;
    std::string anchor;  // the inequality or identity the check measures
    std::string grid_id;
    double band_min = 0.0, band_median = 0.0, band_max = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    bool pass = false;
    std::uint64_t seed = 0;
    double runtime_sec = 0.0;
    std::string diagnostics; // informational notes, or the error on failure
};

struct EstimateEntry {
    std::string name;
    double mean = 0.0, stderr_ = 0.0;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
};

struct HEntry {
    double R = 0.0;
    double H = 0.0;
};

struct VerificationReport {
    std::string schema = REPORT_SCHEMA;
    std::string model_id;
    std::string domain_id;
    std::uint64_t seed = 0;
    std::vector<HEntry> increment_constants; // condition-(H) values by radius
    std::vector<CheckEntry> checks;
    std::vector<EstimateEntry> estimates;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    const CheckEntry* find(const std::string& id) const {
        for (const auto& c : checks)
            if (c.check_id == id) return &c;
        return nullptr;
    }
};

namespace detail {

inline void expect_keys(const nlohmann::json& j,
                        std::initializer_list<const char*> keys,
                        const char* where) {
    if (!j.is_object())
        throw config_error(std::string("report: ") + where + " is not an object");
    for (const char* k : keys)
        if (!j.contains(k))
            throw config_error(std::string("report: ") + where + " missing field '" +
                               k + "'");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known)
            throw config_error(std::string("report: ") + where + " has unknown field '" +
                               it.key() + "'");
    }
}

} // namespace detail

inline nlohmann::json to_json(const CheckEntry& c, bool with_runtime) {
    nlohmann::json j{{"check_id", c.check_id},
                     {"anchor", c.anchor},
                     {"grid_id", c.grid_id},
                     {"band", {{"min", c.band_min}, {"median", c.band_median}, {"max", c.band_max}}},
                     {"ci", {{"lo", c.ci_lo}, {"hi", c.ci_hi}}},
                     {"pass", c.pass},
                     {"seed", c.seed},
                     {"diagnostics", c.diagnostics}};
    if (with_runtime) j["runtime_sec"] = c.runtime_sec;
    return j;
}

inline nlohmann::json to_json(const VerificationReport& r, bool with_runtime = true) {
    nlohmann::json j;
    j["schema"] = r.schema;
    j["model"] = r.model_id;
    j["domain"] = r.domain_id;
    j["seed"] = r.seed;
    auto& hs = j["increment_constants"] = nlohmann::json::array();
    for (const auto& h : r.increment_constants) hs.push_back({{"R", h.R}, {"H", h.H}});
    auto& cs = j["checks"] = nlohmann::json::array();
    for (const auto& c : r.checks) cs.push_back(to_json(c, with_runtime));
    auto& es = j["estimates"] = nlohmann::json::array();
    for (const auto& e : r.estimates)
        es.push_back({{"name", e.name},
                      {"mean", e.mean},
                      {"stderr", e.stderr_},
                      {"n", e.n},
                      {"seed", e.seed}});
    return j;
}

// runtimes excluded: two runs with the same config and seed must match bytewise
inline std::string canonical_payload(const VerificationReport& r) {
    return to_json(r, false).dump(2);
}

inline VerificationReport report_from_json(const nlohmann::json& j) {
    detail::expect_keys(j,
                        {"schema", "model", "domain", "seed", "increment_constants",
                         "checks", "estimates"},
                        "root");
    VerificationReport r;
    r.schema = j.at("schema").get<std::string>();
    if (r.schema != REPORT_SCHEMA)
        throw config_error("report: unsupported schema '" + r.schema + "'");
    r.model_id = j.at("model").get<std::string>();
    r.domain_id = j.at("domain").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& h : j.at("increment_constants")) {
        detail::expect_keys(h, {"R", "H"}, "increment_constants[]");
        r.increment_constants.push_back({h.at("R").get<double>(), h.at("H").get<double>()});
    }
    for (const auto& c : j.at("checks")) {
        const bool with_rt = c.contains("runtime_sec");
        if (with_rt)
            detail::expect_keys(c,
                                {"check_id", "anchor", "grid_id", "band", "ci", "pass",
                                 "seed", "diagnostics", "runtime_sec"},
                                "checks[]");
        else
            detail::expect_keys(c,
                                {"check_id", "anchor", "grid_id", "band", "ci", "pass",
                                 "seed", "diagnostics"},
                                "checks[]");
        detail::expect_keys(c.at("band"), {"min", "median", "max"}, "band");
        detail::expect_keys(c.at("ci"), {"lo", "hi"}, "ci");
        CheckEntry e;
        e.check_id = c.at("check_id").get<std::string>();
        e.anchor = c.at("anchor").get<std::string>();
        e.grid_id = c.at("grid_id").get<std::string>();
        e.band_min = c.at("band").at("min").get<double>();
        e.band_median = c.at("band").at("median").get<double>();
        e.band_max = c.at("band").at("max").get<double>();
        e.ci_lo = c.at("ci").at("lo").get<double>();
        e.ci_hi = c.at("ci").at("hi").get<double>();
        e.pass = c.at("pass").get<bool>();
        e.seed = c.at("seed").get<std::uint64_t>();
        if (with_rt) e.runtime_sec = c.at("runtime_sec").get<double>();
        e.diagnostics = c.at("diagnostics").get<std::string>();
        r.checks.push_back(std::move(e));
    }
    for (const auto& est : j.at("estimates")) {
        detail::expect_keys(est, {"name", "mean", "stderr", "n", "seed"}, "estimates[]");
        EstimateEntry e;
        e.name = est.at("name").get<std::string>();
        e.mean = est.at("mean").get<double>();
        e.stderr_ = est.at("stderr").get<double>();
        e.n = est.at("n").get<std::uint64_t>();
        e.seed = est.at("seed").get<std::uint64_t>();
        r.estimates.push_back(std::move(e));
    }
    return r;
}

inline VerificationReport parse_report(const std::string& text) {
    return report_from_json(nlohmann::json::parse(text));
}

// ---------------------------------------------------------------------------
// dense tables

inline void write_symbol_csv(std::ostream& os, const SymbolEvaluator& sym,
                             const LevyDensity& nu,
                             const std::vector<double>& rs = log_grid(1e-2, 1e2, 33)) {
    os << std::setprecision(17) << "r,psi,psi_star,nu\n";
    for (double r : rs)
        os << r << ',' << sym.psi(r) << ',' << sym.psi_star(r) << ',' << nu(r) << '\n';
}

} // namespace levyhk

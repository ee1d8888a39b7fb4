#pragma once

// Run configuration: plain key = value text, '#' comments.  A run is fully
// determined by its config (model, domain, path sampling, seed), so a saved
// config reproduces the report it came from.
//
//   family  = stable            # stable | relativistic | subordinate_bm | trunc_stable
//   d       = 1
//   alpha   = 1.0               # ignored by relativistic
//   mass    = 1.0               # relativistic only
//   domain  = ball 1.0          # or: union c1 .. cd R | c1 .. cd R | ...
//   eps     = 0.05
//   dt      = 0.001
//   n_paths = 20000
//   seed    = 1
//   gaussian = true             # small-jump Gaussian substitution
//   grids   = default
//   out_dir = out

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "domain.hpp"
#include "model.hpp"
#include "simulate.hpp"

namespace levyhk {

struct RunConfig {
    ModelSpec model;
    DomainKind domain_kind = DomainKind::Ball;
    std::vector<BallSpec> balls{BallSpec{Point::zero(1), 1.0}};
    PathConfig path;
    std::string grids = "default";
    std::string out_dir = "out";
    std::string report_version = REPORT_VERSION;

    static constexpr const char* REPORT_VERSION = "levyhk-report-v1";

    Domain domain() const {
        if (domain_kind == DomainKind::Ball) {
            if (balls.size() != 1) throw config_error("config: ball domain needs one ball");
            return Domain::ball(balls[0].center, balls[0].radius);
        }
        return Domain::symmetric_union(balls);
    }

    void validate() const {
        model.validate();
        for (const auto& b : balls)
            if (b.center.d != model.d)
                throw config_error("config: domain dimension does not match the model");
        domain(); // the factory validates geometry
        if (report_version != REPORT_VERSION)
            throw config_error("config: unsupported report version '" + report_version + "'");
    }

    void write(std::ostream& os) const {
        os << std::setprecision(17);
        os << "family = " << family_name(model.family) << "\n";
        os << "d = " << model.d << "\n";
        os << "alpha = " << model.alpha << "\n";
        os << "mass = " << model.m << "\n";
        os << "domain = ";
        if (domain_kind == DomainKind::Ball) {
            os << "ball " << balls[0].radius << "\n";
        } else {
            os << "union";
            for (std::size_t i = 0; i < balls.size(); ++i) {
                if (i) os << " |";
                for (int j = 0; j < balls[i].center.d; ++j) os << ' ' << balls[i].center[j];
                os << ' ' << balls[i].radius;
            }
            os << "\n";
        }
        os << "eps = " << path.eps << "\n";
        os << "dt = " << path.dt << "\n";
        os << "n_paths = " << path.n_paths << "\n";
        os << "seed = " << path.seed << "\n";
        os << "gaussian = " << (path.substitute_gaussian ? "true" : "false") << "\n";
        os << "grids = " << grids << "\n";
        os << "out_dir = " << out_dir << "\n";
        os << "report_version = " << report_version << "\n";
    }
    std::string str() const {
        std::ostringstream os;
        write(os);
        return os.str();
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<BallSpec> parse_domain_value(const std::string& value, int d,
                                                DomainKind* kind) {
    std::istringstream head(value);
    std::string word;
    head >> word;
    std::vector<BallSpec> out;
    if (word == "ball") {
        double R = 0.0;
        if (!(head >> R)) throw config_error("config: domain = ball needs a radius");
        std::string extra;
        if (head >> extra) throw config_error("config: trailing tokens after ball radius");
        *kind = DomainKind::Ball;
        out.push_back(BallSpec{Point::zero(d), R});
        return out;
    }
    if (word != "union") throw config_error("config: domain must be 'ball' or 'union'");
    *kind = DomainKind::SymmetricUnionOfBalls;
    std::string rest;
    std::getline(head, rest);
    std::istringstream groups(rest);
    std::string group;
    while (std::getline(groups, group, '|')) {
        std::istringstream gs(group);
        std::vector<double> nums;
        double v;
        while (gs >> v) nums.push_back(v);
        if (nums.size() != std::size_t(d) + 1)
            throw config_error("config: each union group needs d coordinates and a radius");
        Point c = Point::zero(d);
        for (int j = 0; j < d; ++j) c[j] = nums[std::size_t(j)];
        out.push_back(BallSpec{c, nums[std::size_t(d)]});
    }
    if (out.empty()) throw config_error("config: union domain needs at least one ball");
    return out;
}

} // namespace detail

inline RunConfig parse_run_config(std::istream& is) {
    RunConfig cfg;
    std::string domain_value = "ball 1.0";
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config: line " + std::to_string(lineno) +
                               " is not 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (value.empty())
            throw config_error("config: empty value for '" + key + "'");
        auto as_double = [&] {
            try {
                std::size_t pos = 0;
                const double v = std::stod(value, &pos);
                if (pos != value.size()) throw std::invalid_argument("");
                return v;
            } catch (const std::exception&) {
                throw config_error("config: bad number for '" + key + "'");
            }
        };
        auto as_bool = [&] {
            if (value == "true") return true;
            if (value == "false") return false;
            throw config_error("config: '" + key + "' must be true or false");
        };
        if (key == "family") cfg.model.family = family_from_name(value);
        else if (key == "d") cfg.model.d = int(as_double());
        else if (key == "alpha") cfg.model.alpha = as_double();
        else if (key == "mass") cfg.model.m = as_double();
        else if (key == "domain") domain_value = value;
        else if (key == "eps") cfg.path.eps = as_double();
        else if (key == "dt") cfg.path.dt = as_double();
        else if (key == "n_paths") cfg.path.n_paths = std::size_t(as_double());
        else if (key == "seed") cfg.path.seed = std::uint64_t(as_double());
        else if (key == "gaussian") cfg.path.substitute_gaussian = as_bool();
        else if (key == "grids") cfg.grids = value;
        else if (key == "out_dir") cfg.out_dir = value;
        else if (key == "report_version") cfg.report_version = value;
        else throw config_error("config: unknown key '" + key + "'");
    }
    cfg.balls = detail::parse_domain_value(domain_value, cfg.model.d, &cfg.domain_kind);
    cfg.validate();
    return cfg;
}

inline RunConfig parse_run_config(const std::string& text) {
    std::istringstream is(text);
    return parse_run_config(is);
}

} // namespace levyhk

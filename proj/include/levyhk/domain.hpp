#pragma once

// Open domains built from Euclidean balls: a single ball, or a finite union
// that is closed under reflection of the first coordinate.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"

namespace levyhk {

struct BallSpec {
    Point center;
    double radius = 0.0;
};

enum class DomainKind { Ball, SymmetricUnionOfBalls };

class Domain {
public:
    static Domain ball(const Point& center, double radius) {
        Domain d;
        d.kind_ = DomainKind::Ball;
        d.balls_.push_back({center, radius});
        d.validate();
        return d;
    }

    static Domain symmetric_union(std::vector<BallSpec> balls) {
        Domain d;
        d.kind_ = DomainKind::SymmetricUnionOfBalls;
        d.balls_ = std::move(balls);
        d.validate();
        if (!d.is_symmetric())
            throw config_error("Domain: union is not symmetric under x1 -> -x1");
        return d;
    }

    DomainKind kind() const { return kind_; }
    int dim() const { return balls_.front().center.d; }
    const std::vector<BallSpec>& balls() const { return balls_; }

    bool contains(const Point& x) const {
        for (const auto& b : balls_)
            if ((x - b.center).norm() < b.radius) return true;
        return false;
    }

    // Distance to the complement, as seen from the deepest covering ball.
    // Exact for a single ball and for pairwise disjoint unions; a lower
    // bound when balls overlap.  Zero outside the domain.
    double delta(const Point& x) const {
        double best = 0.0;
        for (const auto& b : balls_)
            best = std::max(best, b.radius - (x - b.center).norm());
        return best;
    }

    double distance_outside(const Point& x) const { // 0 on the closure
        double best = INF;
        for (const auto& b : balls_)
            best = std::min(best, (x - b.center).norm() - b.radius);
        return std::max(best, 0.0);
    }

    double diameter() const {
        double best = 0.0;
        for (const auto& a : balls_)
            for (const auto& b : balls_)
                best = std::max(best,
                                (a.center - b.center).norm() + a.radius + b.radius);
        return best;
    }

    bool is_symmetric() const {
        const double tol = 1e-12;
        for (const auto& a : balls_) {
            const Point ra = reflect_first(a.center);
            bool matched = false;
            for (const auto& b : balls_)
                if ((ra - b.center).norm() <= tol &&
                    std::abs(a.radius - b.radius) <= tol) {
                    matched = true;
                    break;
                }
            if (!matched) return false;
        }
        return true;
    }

    std::string id() const {
        std::ostringstream os;
        os << (kind_ == DomainKind::Ball ? "ball" : "balls");
        for (const auto& b : balls_) {
            os << "[";
            for (int i = 0; i < b.center.d; ++i)
                os << (i ? "," : "") << b.center[i];
            os << ";" << b.radius << "]";
        }
        return os.str();
    }

private:
    void validate() const {
        if (balls_.empty()) throw config_error("Domain: needs at least one ball");
        const int d = balls_.front().center.d;
        if (d < 1 || d > MAX_DIM) throw config_error("Domain: bad dimension");
        for (const auto& b : balls_) {
            if (b.center.d != d)
                throw config_error("Domain: mixed dimensions");
            if (!(b.radius > 0.0) || !std::isfinite(b.radius))
                throw config_error("Domain: radius must be positive");
        }
    }

    DomainKind kind_ = DomainKind::Ball;
    std::vector<BallSpec> balls_;
};

} // namespace levyhk

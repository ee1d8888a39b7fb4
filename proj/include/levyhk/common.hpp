#pragma once

// Shared small utilities: grids, compensated sums, monotone cubic interpolation,
// fixed-capacity points, bracketing/bisection, timing.

#include <algorithm>
#include <array>
#include <cmath>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace levyhk {

inline constexpr double PI = 3.14159265358979323846;
inline constexpr double INF = std::numeric_limits<double>::infinity();

class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// grids

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2)
        throw std::invalid_argument("log_grid: need 0 < lo < hi and n >= 2");
    std::vector<double> g(n);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = std::exp(a + (b - a) * double(i) / double(n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

inline std::vector<double> lin_grid(double lo, double hi, std::size_t n) {
    if (!(hi > lo) || n < 2)
        throw std::invalid_argument("lin_grid: need lo < hi and n >= 2");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * double(i) / double(n - 1);
    g.back() = hi;
    return g;
}

// ---------------------------------------------------------------------------
// compensated summation (Neumaier variant)

class KahanSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            c_ += (sum_ - t) + x;
        else
            c_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + c_; }
private:
    double sum_ = 0.0, c_ = 0.0;
};

// ---------------------------------------------------------------------------
// monotone piecewise-cubic interpolation (Fritsch-Carlson slopes)

class Pchip {
public:
    Pchip() = default;

    Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n)
            throw std::invalid_argument("Pchip: need matching arrays, size >= 2");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1]))
                throw std::invalid_argument("Pchip: abscissae must be strictly increasing");
        m_.resize(n);
        std::vector<double> d(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i)
            d[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
        if (n == 2) {
            m_[0] = m_[1] = d[0];
        } else {
            for (std::size_t i = 1; i + 1 < n; ++i) {
                if (d[i - 1] == 0.0 || d[i] == 0.0 || (d[i - 1] > 0) != (d[i] > 0)) {
                    m_[i] = 0.0;
                } else {
                    const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
                    const double w1 = 2.0 * h1 + h0, w2 = h1 + 2.0 * h0;
                    m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
                }
            }
            m_[0] = edge_slope(x_[1] - x_[0], x_[2] - x_[1], d[0], d[1]);
            m_[n - 1] = edge_slope(x_[n - 1] - x_[n - 2], x_[n - 2] - x_[n - 3], d[n - 2], d[n - 3]);
        }
    }

    double operator()(double q) const {
        const std::size_t i = segment(q);
        const double h = x_[i + 1] - x_[i];
        const double t = (q - x_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        return h00 * y_[i] + h * h10 * m_[i] + h01 * y_[i + 1] + h * h11 * m_[i + 1];
    }

    double derivative(double q) const {
        const std::size_t i = segment(q);
        const double h = x_[i + 1] - x_[i];
        const double t = (q - x_[i]) / h;
        const double dh00 = (6 * t * t - 6 * t) / h, dh10 = 3 * t * t - 4 * t + 1;
        const double dh01 = (-6 * t * t + 6 * t) / h, dh11 = 3 * t * t - 2 * t;
        return dh00 * y_[i] + dh10 * m_[i] + dh01 * y_[i + 1] + dh11 * m_[i + 1];
    }

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }
    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }
    bool empty() const { return x_.empty(); }

private:
    static double edge_slope(double h0, double h1, double d0, double d1) {
        double m = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (m * d0 <= 0.0) return 0.0;
        if (d0 * d1 < 0.0 && std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
        return m;
    }
    std::size_t segment(double q) const {
        if (q <= x_.front()) return 0;
        if (q >= x_.back()) return x_.size() - 2;
        auto it = std::upper_bound(x_.begin(), x_.end(), q);
        return std::size_t(it - x_.begin()) - 1;
    }
    std::vector<double> x_, y_, m_;
};

// log-log wrapper: interpolates log y against log x, power-law extension at both ends
class LogLogInterp {
public:
    LogLogInterp() = default;
    LogLogInterp(const std::vector<double>& x, const std::vector<double>& y) {
        std::vector<double> lx(x.size()), ly(y.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!(x[i] > 0.0) || !(y[i] > 0.0))
                throw std::invalid_argument("LogLogInterp: data must be positive");
            lx[i] = std::log(x[i]);
            ly[i] = std::log(y[i]);
        }
        p_ = Pchip(std::move(lx), std::move(ly));
    }
    double operator()(double q) const { return std::exp(p_(std::log(q))); }
    // log of the interpolated value; stays finite where exp() would overflow
    double log_value(double q) const { return p_(std::log(q)); }
    // d/dq of the interpolant
    double derivative(double q) const {
        const double lq = std::log(q);
        return std::exp(p_(lq)) * p_.derivative(lq) / q;
    }
    double x_min() const { return std::exp(p_.x_min()); }
    double x_max() const { return std::exp(p_.x_max()); }
    bool empty() const { return p_.empty(); }
private:
    Pchip p_;
};

// ---------------------------------------------------------------------------
// fixed-capacity point for simulation (d <= MAX_DIM)

inline constexpr int MAX_DIM = 6;

struct Point {
    std::array<double, MAX_DIM> c{};
    int d = 1;

    static Point zero(int dim) {
        Point p;
        p.d = dim;
        return p;
    }
    double& operator[](int i) { return c[std::size_t(i)]; }
    double operator[](int i) const { return c[std::size_t(i)]; }

    Point& operator+=(const Point& o) {
        for (int i = 0; i < d; ++i) c[std::size_t(i)] += o.c[std::size_t(i)];
        return *this;
    }
    friend Point operator+(Point a, const Point& b) { return a += b; }
    friend Point operator-(Point a, const Point& b) {
        for (int i = 0; i < a.d; ++i) a.c[std::size_t(i)] -= b.c[std::size_t(i)];
        return a;
    }
    double norm() const {
        double s = 0;
        for (int i = 0; i < d; ++i) s += c[std::size_t(i)] * c[std::size_t(i)];
        return std::sqrt(s);
    }
};

inline Point axis_point(int dim, double x1) {
    Point p = Point::zero(dim);
    p[0] = x1;
    return p;
}

inline Point make_point(std::initializer_list<double> cs) {
    if (cs.size() < 1 || int(cs.size()) > MAX_DIM)
        throw std::invalid_argument("make_point: bad dimension");
    Point p = Point::zero(int(cs.size()));
    int i = 0;
    for (double c : cs) p[i++] = c;
    return p;
}

// reflection in the first coordinate: x -> x-hat
inline Point reflect_first(Point p) {
    p[0] = -p[0];
    return p;
}

// ---------------------------------------------------------------------------
// root bracketing on a monotone function

template <class F>
double bisect_increasing(F&& f, double lo, double hi, double target, int iters = 200) {
    double flo = f(lo), fhi = f(hi);
    if (flo >= target) return lo;
    if (fhi < target) throw numeric_error("bisect_increasing: target not bracketed");
    for (int i = 0; i < iters && hi - lo > 0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) >= target) hi = mid; else lo = mid;
    }
    return hi;
}

// ---------------------------------------------------------------------------

class Stopwatch {
public:
    Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }
private:
    std::chrono::steady_clock::time_point t0_;
};

inline double median_of(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median_of: empty");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// surface of the unit sphere S^{d-1} in R^d
inline double sphere_area(int d) {
    return 2.0 * std::pow(PI, 0.5 * d) / std::tgamma(0.5 * d);
}

} // namespace levyhk

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bbs/error.hpp"

namespace bbs {

inline constexpr double kKnotMergeTol = 1e-12;
inline constexpr double kCollinearTol = 1e-12;
inline constexpr double kEqualTol = 1e-9;
inline constexpr double kStrictSlope = 1e-10;

/// Continuous non-decreasing piecewise-linear function on [0, inf) with
/// f(0) = 0 and a linear tail past the last breakpoint.
///
/// Values are always stored in canonical form: breakpoints closer than
/// kKnotMergeTol are merged and interior collinear breakpoints are dropped.
class PiecewiseLinear {
public:
    /// The zero function.
    PiecewiseLinear() : u_{0.0}, f_{0.0}, tail_(0.0) {}

    PiecewiseLinear(std::vector<double> u, std::vector<double> f, double tail_slope)
        : u_(std::move(u)), f_(std::move(f)), tail_(tail_slope) {
        validate_and_canonicalize();
    }

    /// Builds from (u, f) pairs; the first pair must be (0, 0).
    static PiecewiseLinear from_points(std::span<const std::pair<double, double>> pts, double tail_slope) {
        std::vector<double> u, f;
        for (auto [a, b] : pts) {
            u.push_back(a);
            f.push_back(b);
        }
        return PiecewiseLinear(std::move(u), std::move(f), tail_slope);
    }

    static PiecewiseLinear linear(double c) { return PiecewiseLinear({0.0}, {0.0}, c); }
    static PiecewiseLinear identity() { return linear(1.0); }

    std::span<const double> knots() const noexcept { return u_; }
    std::span<const double> values() const noexcept { return f_; }
    double tail_slope() const noexcept { return tail_; }
    std::size_t size() const noexcept { return u_.size(); }
    double last_knot() const noexcept { return u_.back(); }

    double operator()(double u) const { return eval(u); }

    double eval(double u) const {
        if (!(u >= 0.0)) throw domain_error("NegativeArgument", "piecewise-linear evaluation at negative u");
        if (u >= u_.back()) {
            if (std::isinf(u)) return tail_ > 0 ? u : f_.back();
            return f_.back() + tail_ * (u - u_.back());
        }
        const auto k = static_cast<std::size_t>(std::upper_bound(u_.begin(), u_.end(), u) - u_.begin()) - 1;
        const double w = (u - u_[k]) / (u_[k + 1] - u_[k]);
        return f_[k] + w * (f_[k + 1] - f_[k]);
    }

    /// Slope of segment k (between knots k and k+1); k == size()-1 is the tail.
    double slope(std::size_t k) const {
        if (k + 1 >= u_.size()) return tail_;
        return (f_[k + 1] - f_[k]) / (u_[k + 1] - u_[k]);
    }

    /// Slope on the piece containing u (right derivative).
    double slope_at(double u) const {
        if (u >= u_.back()) return tail_;
        const auto k = static_cast<std::size_t>(std::upper_bound(u_.begin(), u_.end(), u) - u_.begin()) - 1;
        return slope(k);
    }

    double max_slope() const {
        double m = tail_;
        for (std::size_t k = 0; k + 1 < u_.size(); ++k) m = std::max(m, slope(k));
        return m;
    }

    double min_slope() const {
        double m = tail_;
        for (std::size_t k = 0; k + 1 < u_.size(); ++k) m = std::min(m, slope(k));
        return m;
    }

    /// Membership in the strictly increasing class C-up.
    bool strictly_increasing(double tol = kStrictSlope) const { return min_slope() >= tol; }

    /// sup f, which is +inf unless the tail is flat.
    double sup() const { return tail_ > 0 ? std::numeric_limits<double>::infinity() : f_.back(); }

private:
    std::vector<double> u_, f_;
    double tail_;

    void validate_and_canonicalize() {
        if (u_.empty() || u_.size() != f_.size()) throw schema_error("piecewise-linear: knots and values must be non-empty and of equal length");
        if (u_[0] != 0.0 || std::abs(f_[0]) > kKnotMergeTol) throw schema_error("piecewise-linear: first breakpoint must be (0, 0)");
        f_[0] = 0.0;
        if (!(tail_ >= -kCollinearTol) || !std::isfinite(tail_)) throw schema_error("piecewise-linear: tail slope must be finite and non-negative");
        tail_ = std::max(tail_, 0.0);
        for (std::size_t k = 0; k < u_.size(); ++k) {
            if (!std::isfinite(u_[k]) || !std::isfinite(f_[k])) throw schema_error("piecewise-linear: non-finite breakpoint");
            if (k > 0 && !(u_[k] > u_[k - 1])) throw schema_error("piecewise-linear: knots must be strictly increasing");
        }

        // merge knots that are too close
        std::vector<double> u{u_[0]}, f{f_[0]};
        for (std::size_t k = 1; k < u_.size(); ++k) {
            if (u_[k] - u.back() < kKnotMergeTol) {
                f.back() = std::max(f.back(), f_[k]);
                continue;
            }
            double v = f_[k];
            if (v < f.back()) {
                const double scale = std::max(1.0, std::abs(v));
                if (f.back() - v > kKnotMergeTol * scale) throw schema_error("piecewise-linear: values must be non-decreasing");
                v = f.back();
            }
            u.push_back(u_[k]);
            f.push_back(v);
        }

        // drop collinear breakpoints (interior and against the tail)
        std::vector<double> cu{u[0]}, cf{f[0]};
        for (std::size_t k = 1; k < u.size(); ++k) {
            const double s_in = (f[k] - cf.back()) / (u[k] - cu.back());
            const double s_out = k + 1 < u.size() ? (f[k + 1] - f[k]) / (u[k + 1] - u[k]) : tail_;
            if (std::abs(s_in - s_out) <= kCollinearTol * std::max(1.0, std::abs(s_in))) continue;
            cu.push_back(u[k]);
            cf.push_back(f[k]);
        }
        u_ = std::move(cu);
        f_ = std::move(cf);
    }
};

/// Sorted union of the knots of several functions, merged at kKnotMergeTol.
inline std::vector<double> common_knots(std::span<const PiecewiseLinear* const> fs) {
    std::vector<double> all;
    for (auto* f : fs) all.insert(all.end(), f->knots().begin(), f->knots().end());
    std::sort(all.begin(), all.end());
    std::vector<double> out;
    for (double u : all)
        if (out.empty() || u - out.back() >= kKnotMergeTol) out.push_back(u);
    return out;
}

inline std::vector<double> common_knots(const PiecewiseLinear& a, const PiecewiseLinear& b) {
    const PiecewiseLinear* fs[] = {&a, &b};
    return common_knots(fs);
}

/// sup |f - g| over [0, u_max]. With u_max = inf the tails are compared too.
inline double sup_distance(const PiecewiseLinear& f, const PiecewiseLinear& g,
                           double u_max = std::numeric_limits<double>::infinity()) {
    double d = 0.0;
    for (double u : common_knots(f, g)) {
        if (u > u_max) break;
        d = std::max(d, std::abs(f(u) - g(u)));
    }
    if (std::isinf(u_max)) {
        if (std::abs(f.tail_slope() - g.tail_slope()) > 0.0) return std::numeric_limits<double>::infinity();
    } else {
        d = std::max(d, std::abs(f(u_max) - g(u_max)));
    }
    return d;
}

/// Equality of canonical forms: sup-norm within tol on a shared refinement
/// and matching tails.
inline bool approx_equal(const PiecewiseLinear& f, const PiecewiseLinear& g, double tol = kEqualTol) {
    if (std::abs(f.tail_slope() - g.tail_slope()) > tol) return false;
    for (double u : common_knots(f, g))
        if (std::abs(f(u) - g(u)) > tol) return false;
    return true;
}

/// Right-continuous inverse z -> inf{u : f(u) > z}, evaluated pointwise.
/// Returns +inf beyond sup f.
class RightInverse {
public:
    explicit RightInverse(PiecewiseLinear f) : f_(std::move(f)) {}

    double operator()(double z) const {
        if (!(z >= 0.0)) throw domain_error("NegativeArgument", "inverse evaluated at negative z");
        auto vals = f_.values();
        auto knots = f_.knots();
        const auto it = std::upper_bound(vals.begin(), vals.end(), z);
        if (it == vals.end()) {
            if (f_.tail_slope() <= 0.0) return std::numeric_limits<double>::infinity();
            return knots.back() + (z - vals.back()) / f_.tail_slope();
        }
        const auto k = static_cast<std::size_t>(it - vals.begin());
        if (k == 0) return 0.0;
        const double s = (vals[k] - vals[k - 1]) / (knots[k] - knots[k - 1]);
        return knots[k - 1] + (z - vals[k - 1]) / s;
    }

    const PiecewiseLinear& function() const noexcept { return f_; }

private:
    PiecewiseLinear f_;
};

inline RightInverse right_inverse(const PiecewiseLinear& f) { return RightInverse(f); }

/// Functional inverse of f in C-up. For functions with flat pieces or a flat
/// tail the inverse is not continuous; use right_inverse instead.
inline PiecewiseLinear inverse(const PiecewiseLinear& f) {
    if (!f.strictly_increasing())
        throw domain_error("NotStrictlyIncreasing", "inverse: function has a segment with slope below " + std::to_string(kStrictSlope));
    std::vector<double> u(f.values().begin(), f.values().end());
    std::vector<double> v(f.knots().begin(), f.knots().end());
    return PiecewiseLinear(std::move(u), std::move(v), 1.0 / f.tail_slope());
}

/// f o g, exact up to rounding. Breakpoints are g's together with the
/// g-preimages of f's breakpoints.
inline PiecewiseLinear compose(const PiecewiseLinear& f, const PiecewiseLinear& g) {
    auto gu = g.knots();
    auto gv = g.values();
    auto fu = f.knots();
    std::vector<double> u;
    u.reserve(gu.size() + fu.size());
    std::size_t j = 1;   // next f knot to place
    for (std::size_t k = 0; k < gu.size(); ++k) {
        u.push_back(gu[k]);
        const bool last = k + 1 == gu.size();
        const double s = g.slope(k);
        if (s <= 0.0) continue;
        const double hi = last ? std::numeric_limits<double>::infinity() : gv[k + 1];
        while (j < fu.size() && fu[j] <= gv[k]) ++j;
        while (j < fu.size() && fu[j] < hi) {
            u.push_back(gu[k] + (fu[j] - gv[k]) / s);
            ++j;
        }
    }
    std::sort(u.begin(), u.end());
    std::vector<double> uu, vv;
    for (double x : u) {
        if (!uu.empty() && x - uu.back() < kKnotMergeTol) continue;
        uu.push_back(x);
        vv.push_back(f(g(x)));
    }
    // beyond the last knot g is linear and g(u) sits past f's last knot (or g is flat)
    const double tail = g.tail_slope() > 0.0 ? f.tail_slope() * g.tail_slope() : 0.0;
    return PiecewiseLinear(std::move(uu), std::move(vv), tail);
}

/// z -> f((z - s) v 0).
inline PiecewiseLinear shift_floor(const PiecewiseLinear& f, double s) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw schema_error("shift_floor: shift must be finite and non-negative");
    if (s == 0.0) return f;
    std::vector<double> u{0.0}, v{0.0};
    for (std::size_t k = 0; k < f.size(); ++k) {
        u.push_back(f.knots()[k] + s);
        v.push_back(f.values()[k]);
    }
    return PiecewiseLinear(std::move(u), std::move(v), f.tail_slope());
}

/// Linear combination c0 * u + sum_k c_k f_k evaluated on the common knots.
/// Returns knots, values and tail slope without any monotonicity check.
struct RawPiecewise {
    std::vector<double> u, v;
    double tail = 0.0;

    double slope(std::size_t k) const { return k + 1 < u.size() ? (v[k + 1] - v[k]) / (u[k + 1] - u[k]) : tail; }
    double min_slope() const {
        double m = tail;
        for (std::size_t k = 0; k + 1 < u.size(); ++k) m = std::min(m, slope(k));
        return m;
    }
    PiecewiseLinear to_plf() const { return PiecewiseLinear(u, v, tail); }
};

inline RawPiecewise linear_combination(double c0, std::span<const double> c, std::span<const PiecewiseLinear* const> fs,
                                       std::span<const double> knots) {
    RawPiecewise r;
    r.u.assign(knots.begin(), knots.end());
    r.v.assign(knots.size(), 0.0);
    r.tail = c0;
    for (std::size_t q = 0; q < knots.size(); ++q) r.v[q] = c0 * knots[q];
    for (std::size_t k = 0; k < fs.size(); ++k) {
        if (c[k] == 0.0) continue;
        for (std::size_t q = 0; q < knots.size(); ++q) r.v[q] += c[k] * (*fs[k])(knots[q]);
        r.tail += c[k] * fs[k]->tail_slope();
    }
    return r;
}

} // namespace bbs

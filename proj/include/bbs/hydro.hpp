#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "bbs/error.hpp"
#include "bbs/plf.hpp"
#include "bbs/scattering.hpp"
#include "bbs/speeds.hpp"

namespace bbs {

/// Raised-cosine bump c * ((1 - cos(2 pi (u - a) / (b - a))) / 2)^q on [a, b].
/// q = 1 is C^1, q = 2 is C^3.
struct Bump {
    double a = 0.0, b = 1.0, c = 0.0;
    int q = 1;

    void validate() const {
        if (!(a >= 0.0) || !(b > a) || !(c >= 0.0) || !std::isfinite(b) || !std::isfinite(c))
            throw schema_error("bump: need 0 <= a < b and c >= 0");
        if (q != 1 && q != 2) throw schema_error("bump: exponent q must be 1 or 2");
    }

    double density(double u) const {
        if (u <= a || u >= b) return 0.0;
        const double s = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * (u - a) / (b - a)));
        return q == 1 ? c * s : c * s * s;
    }

    double mass() const { return c * (b - a) * (q == 1 ? 0.5 : 0.375); }

    /// integral of the density over [0, u]
    double integral(double u) const {
        if (u <= a) return 0.0;
        if (u >= b) return mass();
        const double L = b - a, s = u - a, th = 2.0 * std::numbers::pi * s / L;
        const double pi = std::numbers::pi;
        if (q == 1) return 0.5 * c * (s - L / (2.0 * pi) * std::sin(th));
        return c * (0.375 * s - L / (4.0 * pi) * std::sin(th) + L / (32.0 * pi) * std::sin(2.0 * th));
    }
};

/// Closed-form soliton densities, each a sum of bumps.
struct SmoothProfile {
    std::vector<std::vector<Bump>> components;

    int sizes() const { return static_cast<int>(components.size()); }

    double rho(int i, double u) const {
        double r = 0.0;
        for (const auto& b : components[static_cast<std::size_t>(i - 1)]) r += b.density(u);
        return r;
    }
    double psi(int i, double u) const {
        double r = 0.0;
        for (const auto& b : components[static_cast<std::size_t>(i - 1)]) r += b.integral(u);
        return r;
    }
    double mass(int i) const {
        double r = 0.0;
        for (const auto& b : components[static_cast<std::size_t>(i - 1)]) r += b.mass();
        return r;
    }
};

/// rho_i sampled at u_k = k h, k = 0..K.
struct DensityGrid {
    double h = 0.0;
    std::vector<std::vector<double>> values;
    std::optional<SmoothProfile> generator;

    int sizes() const { return static_cast<int>(values.size()); }
    std::size_t nodes() const { return values.empty() ? 0 : values[0].size(); }
    double length() const { return h * static_cast<double>(nodes() - 1); }
    double node(std::size_t k) const { return h * static_cast<double>(k); }
    double at(int i, std::size_t k) const { return values[static_cast<std::size_t>(i - 1)][k]; }

    std::vector<double> rho_at(std::size_t k) const {
        std::vector<double> r(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) r[i] = values[i][k];
        return r;
    }

    void validate() const {
        if (!(h > 0.0) || !std::isfinite(h)) throw schema_error("density grid: spacing must be positive");
        if (values.empty() || values[0].size() < 3) throw schema_error("density grid: need at least one size and three nodes");
        for (const auto& row : values) {
            if (row.size() != values[0].size()) throw schema_error("density grid: ragged rows");
            for (double v : row)
                if (!(v >= 0.0) || !std::isfinite(v)) throw schema_error("density grid: densities must be finite and non-negative");
        }
    }

    static DensityGrid sample(const SmoothProfile& p, double h, double length) {
        if (!(h > 0.0) || !(length > 0.0)) throw schema_error("density grid: spacing and length must be positive");
        for (const auto& c : p.components)
            for (const auto& b : c) b.validate();
        const auto K = static_cast<std::size_t>(std::llround(length / h));
        DensityGrid g;
        g.h = h;
        g.generator = p;
        g.values.assign(static_cast<std::size_t>(p.sizes()), std::vector<double>(K + 1));
        for (int i = 1; i <= p.sizes(); ++i)
            for (std::size_t k = 0; k <= K; ++k) g.values[static_cast<std::size_t>(i - 1)][k] = p.rho(i, h * static_cast<double>(k));
        return g;
    }

    static DensityGrid constant(std::vector<double> rho, double h, double length) {
        const auto K = static_cast<std::size_t>(std::llround(length / h));
        DensityGrid g;
        g.h = h;
        for (double r : rho) g.values.emplace_back(K + 1, r);
        g.validate();
        return g;
    }
};

inline constexpr double kDensityMargin = 1e-8;

struct DensityDomainReport {
    bool member = false;
    double cond1_margin = 0.0;   ///< 1 - max_u sum_i 2 i rho_i
    double cond2_margin = 0.0;   ///< 1/2 - sum_i i max_u rho_i / d_i
    bool regular_at_origin = true;
};

/// Pointwise margins of the two density conditions. Whether rho vanishes at
/// the origin is reported separately.
inline DensityDomainReport check_density_domain(const DensityGrid& rho) {
    rho.validate();
    DensityDomainReport r;
    const int I = rho.sizes();
    double load = 0.0;
    std::vector<double> best(static_cast<std::size_t>(I), 0.0);
    for (std::size_t k = 0; k < rho.nodes(); ++k) {
        const auto v = rho.rho_at(k);
        load = std::max(load, density_load(v));
        for (int i = 1; i <= I; ++i) {
            const double d = free_fraction(v, i);
            const double ri = v[static_cast<std::size_t>(i - 1)];
            const double ratio = d > 0 ? ri / d : (ri > 0 ? std::numeric_limits<double>::infinity() : 0.0);
            best[static_cast<std::size_t>(i - 1)] = std::max(best[static_cast<std::size_t>(i - 1)], ratio);
        }
    }
    r.cond1_margin = 1.0 - load;
    double s = 0.0;
    for (int i = 1; i <= I; ++i) s += i * best[static_cast<std::size_t>(i - 1)];
    r.cond2_margin = 0.5 - s;
    r.member = r.cond1_margin > kDensityMargin && r.cond2_margin > kDensityMargin;
    for (int i = 1; i <= I; ++i) r.regular_at_origin = r.regular_at_origin && rho.at(i, 0) == 0.0;
    return r;
}

inline void require_density_member(const DensityGrid& rho, const char* op) {
    const auto d = check_density_domain(rho);
    if (!d.member)
        throw domain_error("NotInDensityDomain", std::string(op) + ": density conditions fail (margins " +
                                                     std::to_string(d.cond1_margin) + ", " + std::to_string(d.cond2_margin) + ")");
}

/// psi_i(u) = int_0^u rho_i by the trapezoid rule, with knots at the grid
/// nodes and the last density value continued as the tail slope.
inline IntegratedProfile density_to_integrated(const DensityGrid& rho) {
    require_density_member(rho, "density_to_integrated");
    IntegratedProfile out{{}, Frame::spatial};
    const std::size_t n = rho.nodes();
    std::vector<double> u(n);
    for (std::size_t k = 0; k < n; ++k) u[k] = rho.node(k);
    for (const auto& row : rho.values) {
        std::vector<double> f(n, 0.0);
        for (std::size_t k = 1; k < n; ++k) f[k] = f[k - 1] + 0.5 * rho.h * (row[k - 1] + row[k]);
        out.psi.emplace_back(u, std::move(f), row.back());
    }
    return out;
}

namespace detail {

/// Central differences of psi on the nodes; second-order one-sided at 0.
inline std::vector<double> differentiate(const PiecewiseLinear& psi, double h, std::size_t n) {
    std::vector<double> f(n + 1);
    for (std::size_t k = 0; k <= n; ++k) f[k] = psi(h * static_cast<double>(k));
    std::vector<double> d(n);
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    for (std::size_t k = 1; k < n; ++k) d[k] = (f[k + 1] - f[k - 1]) / (2.0 * h);
    return d;
}

} // namespace detail

/// rho(., t) by differentiating the scattering flow of the integrated profile.
inline DensityGrid flow_density(const DensityGrid& rho0, double t) {
    const auto psi = flow(density_to_integrated(rho0), t);
    DensityGrid out;
    out.h = rho0.h;
    for (int i = 1; i <= psi.sizes(); ++i) {
        auto d = detail::differentiate(psi[i], rho0.h, rho0.nodes());
        for (auto& x : d) x = std::max(x, 0.0);
        out.values.push_back(std::move(d));
    }
    if (!check_density_domain(out).member) throw internal_error("flow_density left the density domain");
    return out;
}

/// sum_i i rho_i as a one-component grid.
inline DensityGrid particle_density(const DensityGrid& rho) {
    rho.validate();
    DensityGrid out;
    out.h = rho.h;
    out.values.assign(1, std::vector<double>(rho.nodes(), 0.0));
    for (int i = 1; i <= rho.sizes(); ++i)
        for (std::size_t k = 0; k < rho.nodes(); ++k) out.values[0][k] += i * rho.at(i, k);
    return out;
}

/// Pointwise evaluation of the exact flow for a closed-form initial profile.
/// The inverses phi_i^{-1} and gamma_0^{-1} are found by safeguarded Newton
/// iteration, so values are accurate to rounding.
class SmoothFlow {
public:
    explicit SmoothFlow(SmoothProfile p) : p_(std::move(p)), I_(p_.sizes()) {
        for (int i = 1; i <= I_; ++i) total_ += 2.0 * i * p_.mass(i);
    }

    int sizes() const { return I_; }
    const SmoothProfile& profile() const { return p_; }

    struct Value {
        double v = 0.0, d = 0.0;   // value and derivative
    };

    /// phi_i(x) and phi_i'(x).
    Value phi(int i, double x) const {
        Value r{x, 1.0};
        for (int j = 1; j <= I_; ++j) {
            r.v -= kappa(i, j) * p_.psi(j, x);
            r.d -= kappa(i, j) * p_.rho(j, x);
        }
        return r;
    }

    /// psibar_i(y) = psi_i(phi_i^{-1}(y)) and its derivative.
    Value psibar(int i, double y) const {
        if (y <= 0.0) return {0.0, p_.rho(i, 0.0) / phi(i, 0.0).d};
        double hi = y;
        for (int j = 1; j <= I_; ++j) hi += kappa(i, j) * p_.mass(j);
        const double x = solve([&](double s) { return phi(i, s); }, y, y, hi);
        return {p_.psi(i, x), p_.rho(i, x) / phi(i, x).d};
    }

    /// psibar_i((z - i t) v 0).
    Value shifted(int i, double z, double t) const {
        const double y = z - i * t;
        if (y <= 0.0) return {0.0, 0.0};
        return psibar(i, y);
    }

    /// gamma_0 at z for time t, with all lifted components psibar^t_i o gamma_i.
    struct Stack {
        Value gamma0;
        std::vector<Value> lifted;   // index i-1, derivative with respect to z
    };

    Stack stack(double z, double t) const {
        Stack s;
        s.lifted.resize(static_cast<std::size_t>(I_));
        for (int i = I_; i >= 0; --i) {
            Value g{z, 1.0};
            for (int j = i + 1; j <= I_; ++j) {
                const auto& P = s.lifted[static_cast<std::size_t>(j - 1)];
                g.v += 2.0 * (j - i) * P.v;
                g.d += 2.0 * (j - i) * P.d;
            }
            if (i == 0) {
                s.gamma0 = g;
            } else {
                const auto b = shifted(i, g.v, t);
                s.lifted[static_cast<std::size_t>(i - 1)] = {b.v, b.d * g.d};
            }
        }
        return s;
    }

    struct Point {
        std::vector<double> psi, rho;
    };

    /// psi_i(u, t) and rho_i(u, t).
    Point at(double u, double t) const {
        const double z = u <= 0.0 ? 0.0 : solve([&](double w) { return stack(w, t).gamma0; }, u, std::max(0.0, u - total_), u);
        const auto s = stack(z, t);
        Point p;
        for (int i = 1; i <= I_; ++i) {
            p.psi.push_back(s.lifted[static_cast<std::size_t>(i - 1)].v);
            p.rho.push_back(s.lifted[static_cast<std::size_t>(i - 1)].d / s.gamma0.d);
        }
        return p;
    }

private:
    SmoothProfile p_;
    int I_;
    double total_ = 0.0;

    /// Root of f(x) = target for increasing f on [lo, hi].
    template <class F>
    static double solve(F&& f, double target, double lo, double hi) {
        double x = std::clamp(target, lo, hi);
        for (int it = 0; it < 200; ++it) {
            const auto v = f(x);
            const double r = v.v - target;
            if (r == 0.0) return x;
            if (r > 0) hi = x;
            else lo = x;
            double next = x - r / v.d;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) return next;
            x = next;
        }
        return x;
    }
};

struct PdeResidual {
    double h = 0.0, delta = 0.0, t = 0.0;
    std::vector<double> rho_level;        ///< d_t rho_i + d_u (v_i^eff rho_i)
    std::vector<double> psi_level;        ///< d_t psi_i + v_i^eff(d_u psi) d_u psi_i
    std::vector<double> effective;        ///< d_t psibar_i + i d_z psibar_i
    std::vector<double> effective_bound;  ///< C h^2 bound for the line above
    double particle_flux = 0.0;           ///< d_t rho_p + d_u sum_i i v_i^eff rho_i

    double max_rho() const { return *std::max_element(rho_level.begin(), rho_level.end()); }
    double max_psi() const { return *std::max_element(psi_level.begin(), psi_level.end()); }
    double max_effective() const { return *std::max_element(effective.begin(), effective.end()); }
};

/// Sup-norm residuals of the density, integrated-density and effective-frame
/// equations on the grid u = h, 2h, ..., length, using central differences
/// of the exact flow.
inline PdeResidual pde_residual(const DensityGrid& rho0, double t, double h, double delta) {
    require_density_member(rho0, "pde_residual");
    if (!rho0.generator) throw schema_error("pde_residual: a closed-form generator is required");
    if (!check_density_domain(rho0).regular_at_origin) throw domain_error("NotInDensityDomain", "pde_residual: densities must vanish at the origin");
    if (!(t > 0.0) || !(h > 0.0) || !(delta > 0.0)) throw schema_error("pde_residual: t, h and delta must be positive");
    if (delta > t) throw schema_error("pde_residual: delta must not exceed t");

    const SmoothFlow F(*rho0.generator);
    const int I = F.sizes();
    const double L = rho0.length();
    const auto n = static_cast<std::size_t>(std::floor(L / h + 1e-9));

    PdeResidual r;
    r.h = h;
    r.delta = delta;
    r.t = t;
    r.rho_level.assign(static_cast<std::size_t>(I), 0.0);
    r.psi_level.assign(static_cast<std::size_t>(I), 0.0);
    r.effective.assign(static_cast<std::size_t>(I), 0.0);
    r.effective_bound.assign(static_cast<std::size_t>(I), 0.0);

    // grid values at times t - delta, t, t + delta on nodes 0..n+1
    std::vector<SmoothFlow::Point> before(n + 2), now(n + 2), after(n + 2);
    for (std::size_t k = 0; k <= n + 1; ++k) {
        const double u = h * static_cast<double>(k);
        before[k] = F.at(u, t - delta);
        now[k] = F.at(u, t);
        after[k] = F.at(u, t + delta);
    }
    auto speeds_of = [](const std::vector<double>& rho) { return effective_speeds(rho).v_eff; };
    std::vector<std::vector<double>> veff(n + 2);
    for (std::size_t k = 0; k <= n + 1; ++k) veff[k] = speeds_of(now[k].rho);

    for (std::size_t k = 1; k <= n; ++k) {
        double flux_t = 0.0, flux_u = 0.0;
        std::vector<double> dpsi(static_cast<std::size_t>(I));
        for (std::size_t i = 0; i < static_cast<std::size_t>(I); ++i)
            dpsi[i] = (now[k + 1].psi[i] - now[k - 1].psi[i]) / (2.0 * h);
        const auto v_from_psi = speeds_of(dpsi);
        for (std::size_t i = 0; i < static_cast<std::size_t>(I); ++i) {
            const double drho_t = (after[k].rho[i] - before[k].rho[i]) / (2.0 * delta);
            const double dflux_u = (veff[k + 1][i] * now[k + 1].rho[i] - veff[k - 1][i] * now[k - 1].rho[i]) / (2.0 * h);
            r.rho_level[i] = std::max(r.rho_level[i], std::abs(drho_t + dflux_u));

            const double dpsi_t = (after[k].psi[i] - before[k].psi[i]) / (2.0 * delta);
            r.psi_level[i] = std::max(r.psi_level[i], std::abs(dpsi_t + v_from_psi[i] * dpsi[i]));

            const double w = static_cast<double>(i + 1);
            flux_t += w * drho_t;
            flux_u += w * dflux_u;
        }
        r.particle_flux = std::max(r.particle_flux, std::abs(flux_t + flux_u));
    }

    // effective frame: theta_t is a pure shift, so only discretisation error remains
    for (int i = 1; i <= I; ++i) {
        double third = 0.0;
        std::vector<double> g(n + 4);
        for (std::size_t k = 0; k < g.size(); ++k) g[k] = F.psibar(i, h * static_cast<double>(k)).v;
        for (std::size_t k = 2; k + 2 < g.size(); ++k)
            third = std::max(third, std::abs(g[k + 2] - 2.0 * g[k + 1] + 2.0 * g[k - 1] - g[k - 2]) / (2.0 * h * h * h));
        for (std::size_t k = 1; k <= n; ++k) {
            const double z = h * static_cast<double>(k);
            const double dt = (F.shifted(i, z, t + delta).v - F.shifted(i, z, t - delta).v) / (2.0 * delta);
            const double dz = (F.shifted(i, z + h, t).v - F.shifted(i, z - h, t).v) / (2.0 * h);
            r.effective[static_cast<std::size_t>(i - 1)] = std::max(r.effective[static_cast<std::size_t>(i - 1)], std::abs(dt + i * dz));
        }
        // Taylor remainder of both central differences, with slack for the estimate of the third derivative
        const double iw = static_cast<double>(i);
        r.effective_bound[static_cast<std::size_t>(i - 1)] = 2.0 * third * (iw * iw * iw * delta * delta + iw * h * h) / 6.0 + 1e-12;
    }
    return r;
}

/// First-order upwind finite volumes for d_t rho_i + d_u (v_i^eff(rho) rho_i) = 0
/// with cells centred at the grid nodes, no inflow at the left and free
/// outflow at the right.
inline DensityGrid fv_integrate(const DensityGrid& rho0, double t, double cfl) {
    require_density_member(rho0, "fv_integrate");
    if (!(cfl > 0.0 && cfl < 1.0)) throw domain_error("CFLViolation", "fv_integrate: CFL number must lie in (0, 1)");
    if (!(t > 0.0)) throw schema_error("fv_integrate: time must be positive");
    const int I = rho0.sizes();
    const std::size_t n = rho0.nodes();
    const double h = rho0.h;
    if (I > kSmallSizes) throw schema_error("fv_integrate: too many sizes");
    const auto w = static_cast<std::size_t>(I);
    // cell-major storage: rho[k * I + i]
    std::vector<double> rho(n * w), v(n * w), flux((n + 1) * w, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < w; ++i) rho[k * w + i] = rho0.values[i][k];

    double now = 0.0;
    while (now < t) {
        double vmax = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double load = 0.0;
            for (std::size_t i = 0; i < w; ++i) load += 2.0 * static_cast<double>(i + 1) * rho[k * w + i];
            if (load >= 1.0)
                throw domain_error("NotInDensityDomain", "fv_integrate: density left the admissible domain at u = " + std::to_string(h * static_cast<double>(k)));
            effective_speeds_small(&rho[k * w], I, &v[k * w]);
            for (std::size_t i = 0; i < w; ++i) vmax = std::max(vmax, std::abs(v[k * w + i]));
        }
        const double dt = std::min(t - now, vmax > 0 ? cfl * h / vmax : t - now);
        // interface k sits between cells k-1 and k; the upwind side follows the
        // mean of the two cell speeds
        for (std::size_t k = 1; k < n; ++k)
            for (std::size_t i = 0; i < w; ++i) {
                const double a = v[(k - 1) * w + i], b = v[k * w + i];
                flux[k * w + i] = a + b >= 0 ? a * rho[(k - 1) * w + i] : b * rho[k * w + i];
            }
        for (std::size_t i = 0; i < w; ++i) {
            flux[i] = v[i] < 0 ? v[i] * rho[i] : 0.0;
            const std::size_t last = (n - 1) * w + i;
            flux[n * w + i] = v[last] > 0 ? v[last] * rho[last] : 0.0;
        }
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < w; ++i)
                rho[k * w + i] = std::max(0.0, rho[k * w + i] - dt / h * (flux[(k + 1) * w + i] - flux[k * w + i]));
        now += dt;
    }
    DensityGrid out;
    out.h = h;
    out.values.assign(static_cast<std::size_t>(I), std::vector<double>(n));
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < w; ++i) out.values[i][k] = rho[k * w + i];
    return out;
}

/// Sup over nodes and sizes of |a - b| on the common grid.
inline double sup_distance(const DensityGrid& a, const DensityGrid& b) {
    if (a.sizes() != b.sizes() || a.nodes() != b.nodes()) throw schema_error("density grids differ in shape");
    double d = 0.0;
    for (int i = 1; i <= a.sizes(); ++i)
        for (std::size_t k = 0; k < a.nodes(); ++k) d = std::max(d, std::abs(a.at(i, k) - b.at(i, k)));
    return d;
}

/// Trapezoid mass of component i.
inline double mass(const DensityGrid& rho, int i) {
    double m = 0.0;
    for (std::size_t k = 1; k < rho.nodes(); ++k) m += 0.5 * rho.h * (rho.at(i, k - 1) + rho.at(i, k));
    return m;
}

} // namespace bbs

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bbs/error.hpp"
#include "bbs/plf.hpp"

namespace bbs {

enum class Frame { spatial, effective };

/// I integrated soliton densities, either psi_i(u) in space or psibar_i(z)
/// on the effective scale. Component k holds size k+1.
struct IntegratedProfile {
    std::vector<PiecewiseLinear> psi;
    Frame frame = Frame::spatial;

    int sizes() const { return static_cast<int>(psi.size()); }
    const PiecewiseLinear& operator[](int i) const { return psi[static_cast<std::size_t>(i - 1)]; }

    static IntegratedProfile zero(int I, Frame frame) {
        return {std::vector<PiecewiseLinear>(static_cast<std::size_t>(I)), frame};
    }
};

inline double sup_distance(const IntegratedProfile& a, const IntegratedProfile& b,
                           double u_max = std::numeric_limits<double>::infinity()) {
    if (a.sizes() != b.sizes()) throw schema_error("profiles have different numbers of sizes");
    double d = 0.0;
    for (int i = 1; i <= a.sizes(); ++i) d = std::max(d, sup_distance(a[i], b[i], u_max));
    return d;
}

/// phi[0] is the identity, phi[i] the effective distance of size i.
struct PhiCoords {
    std::vector<PiecewiseLinear> phi;
};

/// gamma[i] for i = 0..I; gamma[I] is the identity.
struct GammaCoords {
    std::vector<PiecewiseLinear> gamma;
};

inline int kappa(int i, int j) { return 2 * std::min(i, j); }

namespace detail {

inline std::vector<const PiecewiseLinear*> pointers(const std::vector<PiecewiseLinear>& fs) {
    std::vector<const PiecewiseLinear*> p;
    for (const auto& f : fs) p.push_back(&f);
    return p;
}

/// phi_i for i = 0..I as raw piecewise data on the shared refinement.
inline std::vector<RawPiecewise> raw_phi(const IntegratedProfile& psi) {
    const int I = psi.sizes();
    const auto ptrs = pointers(psi.psi);
    const auto knots = common_knots(ptrs);
    std::vector<RawPiecewise> out;
    for (int i = 0; i <= I; ++i) {
        std::vector<double> c(static_cast<std::size_t>(I));
        for (int j = 1; j <= I; ++j) c[static_cast<std::size_t>(j - 1)] = -kappa(i, j);
        out.push_back(linear_combination(1.0, c, ptrs, knots));
    }
    return out;
}

inline void require_frame(const IntegratedProfile& p, Frame f, const char* op) {
    if (p.frame != f)
        throw schema_error(std::string(op) + ": expected a profile in the " + (f == Frame::spatial ? "spatial" : "effective") + " frame");
}

} // namespace detail

/// phi_i(u) = u - sum_j 2(i^j) psi_j(u). Throws NotInDomainF unless phi_I is
/// strictly increasing.
inline PhiCoords effective_coords(const IntegratedProfile& psi) {
    detail::require_frame(psi, Frame::spatial, "effective_coords");
    auto raw = detail::raw_phi(psi);
    if (raw.back().min_slope() < kStrictSlope)
        throw domain_error("NotInDomainF", "effective distance of the largest size is not strictly increasing");
    PhiCoords out;
    for (auto& r : raw) out.phi.push_back(r.to_plf());
    return out;
}

/// psibar_i = psi_i o phi_i^{-1}.
inline IntegratedProfile scatter(const IntegratedProfile& psi, const PhiCoords& phi) {
    IntegratedProfile out{{}, Frame::effective};
    for (int i = 1; i <= psi.sizes(); ++i)
        out.psi.push_back(compose(psi[i], inverse(phi.phi[static_cast<std::size_t>(i)])));
    return out;
}

inline IntegratedProfile scatter(const IntegratedProfile& psi) { return scatter(psi, effective_coords(psi)); }

/// gamma_I = id, gamma_i = id + sum_{j>i} 2(j-i) psibar_j o gamma_j. The
/// compositions psibar_i o gamma_i are handed back through `lifted`.
inline GammaCoords gamma_coords(const IntegratedProfile& psibar, std::vector<PiecewiseLinear>* lifted = nullptr) {
    detail::require_frame(psibar, Frame::effective, "gamma_coords");
    const int I = psibar.sizes();
    std::vector<PiecewiseLinear> gamma(static_cast<std::size_t>(I) + 1);
    std::vector<PiecewiseLinear> comp(static_cast<std::size_t>(I) + 1);
    gamma[static_cast<std::size_t>(I)] = PiecewiseLinear::identity();
    for (int i = I; i >= 0; --i) {
        if (i < I) {
            std::vector<const PiecewiseLinear*> fs;
            std::vector<double> c;
            for (int j = i + 1; j <= I; ++j) {
                fs.push_back(&comp[static_cast<std::size_t>(j)]);
                c.push_back(2.0 * (j - i));
            }
            const auto knots = common_knots(fs);
            gamma[static_cast<std::size_t>(i)] = linear_combination(1.0, c, fs, knots).to_plf();
        }
        if (i >= 1) comp[static_cast<std::size_t>(i)] = compose(psibar[i], gamma[static_cast<std::size_t>(i)]);
    }
    if (lifted) *lifted = std::move(comp);
    return {std::move(gamma)};
}

/// Spatial reconstruction psi_i = psibar_i o gamma_i o gamma_0^{-1}.
inline IntegratedProfile unscatter(const IntegratedProfile& psibar) {
    std::vector<PiecewiseLinear> lifted;
    const auto g = gamma_coords(psibar, &lifted);
    const auto g0inv = inverse(g.gamma[0]);
    IntegratedProfile out{{}, Frame::spatial};
    for (int i = 1; i <= psibar.sizes(); ++i) out.psi.push_back(compose(lifted[static_cast<std::size_t>(i)], g0inv));
    return out;
}

/// Free evolution on the effective scale: size i moves at speed i.
inline IntegratedProfile free_shift(const IntegratedProfile& psibar, double t) {
    detail::require_frame(psibar, Frame::effective, "free_shift");
    if (!(t >= 0.0)) throw schema_error("free_shift: time must be non-negative");
    IntegratedProfile out{{}, Frame::effective};
    for (int i = 1; i <= psibar.sizes(); ++i) out.psi.push_back(shift_floor(psibar[i], i * t));
    return out;
}

struct DomainReport {
    bool member = false;
    double margin = 0.0;
    bool strictly_increasing = true;   ///< phi_I in C-up (spatial frame only)
};

/// Spatial frame: margin = 1/2 - sum_i i * max segment ratio psi_i'/phi_i'.
/// Effective frame: margin = 1/2 - sum_i i * sup slope of psibar_i.
inline DomainReport check_domain(const IntegratedProfile& p) {
    DomainReport r;
    double sum = 0.0;
    if (p.frame == Frame::effective) {
        for (int i = 1; i <= p.sizes(); ++i) sum += i * p[i].max_slope();
        r.margin = 0.5 - sum;
        r.member = r.margin > 0.0;
        return r;
    }
    const auto raw = detail::raw_phi(p);
    r.strictly_increasing = raw.back().min_slope() >= kStrictSlope;
    if (!r.strictly_increasing) {
        r.margin = -std::numeric_limits<double>::infinity();
        return r;
    }
    const auto& knots = raw.front().u;
    for (int i = 1; i <= p.sizes(); ++i) {
        const auto& phi = raw[static_cast<std::size_t>(i)];
        double best = 0.0;
        for (std::size_t k = 0; k < knots.size(); ++k) {
            const double dpsi = k + 1 < knots.size() ? (p[i](knots[k + 1]) - p[i](knots[k])) / (knots[k + 1] - knots[k])
                                                     : p[i].tail_slope();
            best = std::max(best, dpsi / phi.slope(k));
        }
        sum += i * best;
    }
    r.margin = 0.5 - sum;
    r.member = r.margin > 0.0;
    return r;
}

/// psi(., t) = Gamma o theta_t o Upsilon (psi0).
inline IntegratedProfile flow(const IntegratedProfile& psi0, double t) {
    detail::require_frame(psi0, Frame::spatial, "flow");
    if (!(t >= 0.0)) throw schema_error("flow: time must be non-negative");
    const auto d = check_domain(psi0);
    if (!d.member) throw domain_error("NotInDomainD", "flow: initial profile violates the density condition (margin " + std::to_string(d.margin) + ")");
    auto out = unscatter(free_shift(scatter(psi0), t));
    if (!check_domain(out).member) throw internal_error("flow left the admissible domain");
    return out;
}

} // namespace bbs

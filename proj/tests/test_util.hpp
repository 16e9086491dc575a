#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "bbs/config.hpp"
#include "bbs/plf.hpp"
#include "bbs/scattering.hpp"

namespace bbs::gen {

inline const char* kWorkedEta = "1101100110001110000";

/// Random finite configuration: a concatenation of basic strings and empty
/// gaps, which keeps the largest soliton size under control, followed by a
/// light sprinkle of extra balls.
inline BallConfig random_config(std::mt19937_64& rng, int max_size, Site window) {
    std::uniform_int_distribution<int> size_d(1, max_size);
    std::uniform_int_distribution<int> gap_d(0, 3);
    std::bernoulli_distribution coin(0.5);
    std::vector<std::uint8_t> occ;
    while (static_cast<Site>(occ.size()) + 2 * max_size + 3 < window) {
        for (int g = gap_d(rng); g > 0; --g) occ.push_back(0);
        const int i = size_d(rng);
        for (int q = 0; q < i; ++q) occ.push_back(1);
        for (int q = 0; q < i; ++q) occ.push_back(0);
    }
    return BallConfig(std::move(occ));
}

/// Plain i.i.d. occupation with density p.
inline BallConfig iid_config(std::mt19937_64& rng, double p, Site window) {
    std::bernoulli_distribution b(p);
    std::vector<std::uint8_t> occ(static_cast<std::size_t>(window));
    for (auto& o : occ) o = b(rng) ? 1 : 0;
    return BallConfig(std::move(occ));
}

/// Random non-decreasing piecewise-linear function with at most `knots`
/// breakpoints on [0, span], slopes drawn from slope().
template <class SlopeFn>
PiecewiseLinear random_plf(std::mt19937_64& rng, int knots, double span, SlopeFn slope) {
    std::uniform_real_distribution<double> pos(0.0, span);
    std::vector<double> u{0.0};
    for (int k = 1; k < knots; ++k) u.push_back(pos(rng));
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    std::vector<double> f{0.0};
    for (std::size_t k = 1; k < u.size(); ++k) f.push_back(f.back() + slope(k - 1) * (u[k] - u[k - 1]));
    return PiecewiseLinear(std::move(u), std::move(f), slope(u.size()));
}

/// Random spatial profile in D. Each slope of psi_i is at most budget/(i I),
/// so sum_j 2 j rho_j <= 2 budget and sum_i i max rho_i / d_i is at most
/// budget / (1 - 2 budget), below 1/2 for budget < 1/4. Some pieces are flat.
inline IntegratedProfile random_profile_in_d(std::mt19937_64& rng, int I, int knots, double span, double budget = 0.2) {
    std::uniform_real_distribution<double> pos(0.0, span), unit(0.0, 1.0);
    std::vector<double> u{0.0};
    for (int k = 1; k < knots; ++k) u.push_back(pos(rng));
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    const std::size_t pieces = u.size();   // last piece is the tail
    std::vector<std::vector<double>> rho(static_cast<std::size_t>(I), std::vector<double>(pieces));
    for (int i = 1; i <= I; ++i)
        for (std::size_t k = 0; k < pieces; ++k)
            rho[static_cast<std::size_t>(i - 1)][k] = unit(rng) < 0.25 ? 0.0 : unit(rng) * budget / (i * I);
    IntegratedProfile p{{}, Frame::spatial};
    for (int i = 1; i <= I; ++i) {
        const auto& r = rho[static_cast<std::size_t>(i - 1)];
        std::vector<double> f{0.0};
        for (std::size_t k = 1; k < pieces; ++k) f.push_back(f.back() + r[k - 1] * (u[k] - u[k - 1]));
        p.psi.emplace_back(u, std::move(f), r.back());
    }
    return p;
}

} // namespace bbs::gen

#include <gtest/gtest.h>

#include <cmath>

#include "bbs/hydro.hpp"

using namespace bbs;

namespace {

SmoothProfile two_species(int q) {
    SmoothProfile p;
    p.components = {{Bump{2.0, 3.0, 0.1, q}}, {Bump{0.5, 1.5, 0.08, q}}};
    return p;
}

} // namespace

TEST(Bump, IntegralMatchesQuadrature) {
    for (int q : {1, 2}) {
        const Bump b{0.5, 2.0, 0.3, q};
        double acc = 0.0;
        const int n = 200000;
        const double h = 2.5 / n;
        for (int k = 0; k < n; ++k) {
            const double u = (k + 0.5) * h;
            acc += b.density(u) * h;
            if (k % 20000 == 19999) { EXPECT_NEAR(acc, b.integral((k + 1) * h), 1e-9); }
        }
        EXPECT_NEAR(acc, b.mass(), 1e-9);
    }
    EXPECT_THROW((Bump{1.0, 0.5, 0.1, 1}).validate(), Error);
    EXPECT_THROW((Bump{0.0, 1.0, 0.1, 3}).validate(), Error);
}

TEST(DensityDomain, Examples) {
    auto r = check_density_domain(DensityGrid::constant({0.0, 0.0}, 0.1, 1.0));
    EXPECT_TRUE(r.member);
    EXPECT_DOUBLE_EQ(r.cond1_margin, 1.0);
    EXPECT_DOUBLE_EQ(r.cond2_margin, 0.5);

    r = check_density_domain(DensityGrid::constant({0.1, 0.05}, 0.1, 1.0));
    EXPECT_TRUE(r.member);
    EXPECT_NEAR(r.cond1_margin, 0.6, 1e-15);
    EXPECT_NEAR(0.5 - r.cond2_margin, 0.1 / 0.7 + 2 * 0.05 / 0.6, 1e-15);
    EXPECT_FALSE(r.regular_at_origin);

    r = check_density_domain(DensityGrid::constant({0.3}, 0.1, 1.0));
    EXPECT_FALSE(r.member);
    EXPECT_NEAR(0.5 - r.cond2_margin, 0.75, 1e-15);

    EXPECT_TRUE(check_density_domain(DensityGrid::sample(two_species(1), 0.01, 4.0)).regular_at_origin);
}

TEST(DensityToIntegrated, Examples) {
    const auto z = density_to_integrated(DensityGrid::constant({0.0}, 0.1, 2.0));
    EXPECT_TRUE(approx_equal(z[1], PiecewiseLinear()));
    const auto c = density_to_integrated(DensityGrid::constant({0.1}, 0.1, 2.0));
    EXPECT_TRUE(approx_equal(c[1], PiecewiseLinear::linear(0.1)));
    EXPECT_THROW(density_to_integrated(DensityGrid::constant({0.3}, 0.1, 2.0)), Error);
}

TEST(DensityToIntegrated, SecondOrderInH) {
    const auto p = two_species(1);
    double prev = 0.0;
    for (double h : {0.02, 0.01, 0.005}) {
        const auto psi = density_to_integrated(DensityGrid::sample(p, h, 4.0));
        double err = 0.0;
        for (int i = 1; i <= 2; ++i)
            for (double u = 0.0037; u <= 4.0; u += 0.013) err = std::max(err, std::abs(psi[i](u) - p.psi(i, u)));
        EXPECT_TRUE(check_domain(psi).member);
        if (prev > 0) {
            EXPECT_GT(prev / err, 3.0);
            EXPECT_LT(prev / err, 5.0);
        }
        prev = err;
    }
}

TEST(FlowDensity, Examples) {
    const auto z = flow_density(DensityGrid::constant({0.0, 0.0}, 0.05, 3.0), 1.0);
    for (int i = 1; i <= 2; ++i)
        for (std::size_t k = 0; k < z.nodes(); ++k) EXPECT_EQ(z.at(i, k), 0.0);

    const auto g = DensityGrid::sample(two_species(2), 0.005, 8.0);
    const auto same = flow_density(g, 0.0);
    EXPECT_LT(sup_distance(same, g), 1e-4);

    // constant single species: the plateau moves at speed 1 and vacates [0, t]
    const auto plateau = flow_density(DensityGrid::constant({0.1}, 0.01, 6.0), 2.0);
    for (std::size_t k = 0; k < plateau.nodes(); ++k) {
        const double u = plateau.node(k);
        if (u < 1.98) { EXPECT_NEAR(plateau.at(1, k), 0.0, 1e-12); }
        if (u > 2.02) { EXPECT_NEAR(plateau.at(1, k), 0.1, 1e-12); }
    }
}

TEST(FlowDensity, MassConservedAndDomainKept) {
    const auto g = DensityGrid::sample(two_species(1), 0.005, 8.0);
    for (double t : {0.5, 1.0, 1.5}) {
        const auto r = flow_density(g, t);
        EXPECT_TRUE(check_density_domain(r).member);
        for (int i = 1; i <= 2; ++i) EXPECT_NEAR(mass(r, i), mass(g, i), 1e-4);
    }
}

TEST(SmoothFlow, AgreesWithPiecewiseLinearFlow) {
    const auto p = two_species(1);
    const SmoothFlow F(p);
    const auto psi = flow(density_to_integrated(DensityGrid::sample(p, 0.002, 8.0)), 1.0);
    for (double u = 0.0; u <= 8.0; u += 0.05) {
        const auto pt = F.at(u, 1.0);
        for (int i = 1; i <= 2; ++i) EXPECT_NEAR(pt.psi[static_cast<std::size_t>(i - 1)], psi[i](u), 1e-6);
    }
    // t = 0 returns the initial data
    for (double u = 0.0; u <= 4.0; u += 0.1) {
        const auto pt = F.at(u, 0.0);
        EXPECT_NEAR(pt.psi[1], p.psi(2, u), 1e-13);
        EXPECT_NEAR(pt.rho[0], p.rho(1, u), 1e-13);
    }
}

TEST(PdeResidual, ZeroProfile) {
    SmoothProfile p;
    p.components = {{}, {}};
    const auto r = pde_residual(DensityGrid::sample(p, 0.01, 2.0), 0.5, 0.01, 0.01);
    EXPECT_EQ(r.max_rho(), 0.0);
    EXPECT_EQ(r.max_psi(), 0.0);
    EXPECT_EQ(r.max_effective(), 0.0);
    EXPECT_EQ(r.particle_flux, 0.0);
}

TEST(PdeResidual, SecondOrderForSmoothBumps) {
    const auto g = DensityGrid::sample(two_species(2), 0.01, 8.0);
    const auto a = pde_residual(g, 1.0, 0.02, 0.02);
    const auto b = pde_residual(g, 1.0, 0.01, 0.01);
    for (int i = 0; i < 2; ++i) {
        const double rr = a.rho_level[static_cast<std::size_t>(i)] / b.rho_level[static_cast<std::size_t>(i)];
        const double rp = a.psi_level[static_cast<std::size_t>(i)] / b.psi_level[static_cast<std::size_t>(i)];
        EXPECT_GT(rr, 3.5);
        EXPECT_LT(rr, 4.5);
        EXPECT_GT(rp, 3.5);
        EXPECT_LT(rp, 4.5);
        EXPECT_LE(b.effective[static_cast<std::size_t>(i)], b.effective_bound[static_cast<std::size_t>(i)]);
    }
    EXPECT_GT(a.particle_flux / b.particle_flux, 3.5);
    EXPECT_LT(a.particle_flux / b.particle_flux, 4.5);
}

TEST(PdeResidual, RequiresGeneratorAndRegularity) {
    EXPECT_THROW(pde_residual(DensityGrid::constant({0.1}, 0.01, 1.0), 0.5, 0.01, 0.01), Error);
    const auto g = DensityGrid::sample(two_species(1), 0.01, 4.0);
    EXPECT_THROW(pde_residual(g, 0.005, 0.01, 0.01), Error);
}

TEST(ParticleDensity, Examples) {
    const auto p = particle_density(DensityGrid::constant({0.1, 0.05}, 0.1, 1.0));
    ASSERT_EQ(p.sizes(), 1);
    for (std::size_t k = 0; k < p.nodes(); ++k) EXPECT_NEAR(p.at(1, k), 0.2, 1e-15);
    const auto z = particle_density(DensityGrid::constant({0.0, 0.0}, 0.1, 1.0));
    for (std::size_t k = 0; k < z.nodes(); ++k) EXPECT_EQ(z.at(1, k), 0.0);
}

TEST(FvIntegrate, Examples) {
    const auto z = fv_integrate(DensityGrid::constant({0.0, 0.0}, 0.05, 2.0), 1.0, 0.5);
    for (int i = 1; i <= 2; ++i)
        for (std::size_t k = 0; k < z.nodes(); ++k) EXPECT_EQ(z.at(i, k), 0.0);
    EXPECT_THROW(fv_integrate(DensityGrid::constant({0.1}, 0.05, 2.0), 1.0, 1.5), Error);

    // plateau front moves at speed 1; the upwind scheme smears it over O(sqrt(h t)) cells
    const auto r = fv_integrate(DensityGrid::constant({0.1}, 0.005, 6.0), 2.0, 0.5);
    for (std::size_t k = 0; k < r.nodes(); ++k) {
        const double u = r.node(k);
        if (u < 1.7) { EXPECT_LT(r.at(1, k), 1e-3); }
        if (u > 2.3) { EXPECT_NEAR(r.at(1, k), 0.1, 1e-3); }
    }
}

TEST(FvIntegrate, ConvergesToExactFlow) {
    const auto p = two_species(1);
    double prev = 0.0;
    for (double h : {0.008, 0.004}) {
        const auto g = DensityGrid::sample(p, h, 8.0);
        const double d = sup_distance(fv_integrate(g, 1.0, 0.5), flow_density(g, 1.0));
        if (prev > 0) { EXPECT_LT(d, 0.7 * prev); }
        prev = d;
    }
}

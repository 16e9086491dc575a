#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bbs/error.hpp"

namespace bbs {

/// Dense row-major square matrix, small sizes only.
struct Matrix {
    int n = 0;
    std::vector<double> a;

    explicit Matrix(int size = 0) : n(size), a(static_cast<std::size_t>(size) * static_cast<std::size_t>(size), 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i * n + j)]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i * n + j)]; }

    static Matrix identity(int size) {
        Matrix m(size);
        for (int i = 0; i < size; ++i) m(i, i) = 1.0;
        return m;
    }

    Matrix transposed() const {
        Matrix t(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    std::vector<double> apply(std::span<const double> x) const {
        std::vector<double> y(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) y[static_cast<std::size_t>(i)] += (*this)(i, j) * x[static_cast<std::size_t>(j)];
        return y;
    }
};

namespace detail {

/// LU with partial pivoting, in place. Returns the determinant.
inline double lu_factor(Matrix& m, std::vector<int>& piv) {
    const int n = m.n;
    piv.resize(static_cast<std::size_t>(n));
    double det = 1.0;
    for (int k = 0; k < n; ++k) {
        int p = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(m(i, k)) > std::abs(m(p, k))) p = i;
        piv[static_cast<std::size_t>(k)] = p;
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
            det = -det;
        }
        const double d = m(k, k);
        det *= d;
        if (d == 0.0) continue;
        for (int i = k + 1; i < n; ++i) {
            m(i, k) /= d;
            for (int j = k + 1; j < n; ++j) m(i, j) -= m(i, k) * m(k, j);
        }
    }
    return det;
}

inline void lu_solve(const Matrix& lu, const std::vector<int>& piv, std::vector<double>& x) {
    const int n = lu.n;
    for (int k = 0; k < n; ++k) std::swap(x[static_cast<std::size_t>(k)], x[static_cast<std::size_t>(piv[static_cast<std::size_t>(k)])]);
    for (int i = 1; i < n; ++i)
        for (int j = 0; j < i; ++j) x[static_cast<std::size_t>(i)] -= lu(i, j) * x[static_cast<std::size_t>(j)];
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) x[static_cast<std::size_t>(i)] -= lu(i, j) * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(i)] /= lu(i, i);
    }
}

} // namespace detail

struct LinearSolve {
    std::vector<double> x;
    double det = 0.0;
};

/// Solves A x = b by partial-pivot elimination plus one step of residual
/// refinement.
inline LinearSolve solve(const Matrix& A, std::span<const double> b) {
    Matrix lu = A;
    std::vector<int> piv;
    LinearSolve out;
    out.det = detail::lu_factor(lu, piv);
    if (out.det == 0.0) throw internal_error("singular matrix");
    out.x.assign(b.begin(), b.end());
    detail::lu_solve(lu, piv, out.x);
    auto r = A.apply(out.x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    detail::lu_solve(lu, piv, r);
    for (std::size_t i = 0; i < r.size(); ++i) out.x[i] += r[i];
    return out;
}

/// Interaction kernel and bare speeds. The default is the box-ball system:
/// v_i = i and kappa_ij = 2 (i ^ j). Other kernels can be plugged in but are
/// not covered by the tests.
struct Kernel {
    std::function<double(int)> speed = [](int i) { return static_cast<double>(i); };
    std::function<double(int, int)> kappa = [](int i, int j) { return 2.0 * std::min(i, j); };
};

struct SpeedMatrices {
    Matrix M;
    Matrix Mstar;
};

inline double density_load(std::span<const double> rho) {
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) s += 2.0 * static_cast<double>(i + 1) * rho[i];
    return s;
}

inline void require_admissible(std::span<const double> rho) {
    for (double r : rho)
        if (!(r >= 0.0) || !std::isfinite(r)) throw schema_error("densities must be finite and non-negative");
    const double load = density_load(rho);
    if (!(load < 1.0)) throw domain_error("DensityTooLarge", "sum_i 2 i rho_i = " + std::to_string(load) + " is not below 1");
}

/// M_ii = 1 - sum_{j != i} k_ij rho_j, M_ij = k_ij rho_j, and M* with the
/// density index on the row.
inline SpeedMatrices build_matrices(std::span<const double> rho, const Kernel& kernel = {}) {
    require_admissible(rho);
    const int I = static_cast<int>(rho.size());
    SpeedMatrices out{Matrix(I), Matrix(I)};
    for (int i = 0; i < I; ++i) {
        double diag = 1.0;
        double diag_star = 1.0;
        for (int j = 0; j < I; ++j) {
            if (j == i) continue;
            const double k = kernel.kappa(i + 1, j + 1);
            out.M(i, j) = k * rho[static_cast<std::size_t>(j)];
            out.Mstar(i, j) = k * rho[static_cast<std::size_t>(i)];
            diag -= k * rho[static_cast<std::size_t>(j)];
            diag_star -= k * rho[static_cast<std::size_t>(j)];
        }
        out.M(i, i) = diag;
        out.Mstar(i, i) = diag_star;
    }
    for (int i = 0; i < I; ++i)
        for (int j = 0; j < I; ++j)
            if (i != j && out.Mstar(i, j) != out.M(j, i)) throw internal_error("M* is not the transpose of M");
    return out;
}

struct EffSpeeds {
    std::vector<double> v_eff;
    double det = 0.0;
    double det_lower_bound = 1.0;   ///< prod_{i=2}^I d_i
    double matrix_residual = 0.0;
    double fixed_point_residual = 0.0;
};

/// d_i = 1 - sum_j 2(i ^ j) rho_j.
inline double free_fraction(std::span<const double> rho, int i) {
    double d = 1.0;
    for (std::size_t j = 0; j < rho.size(); ++j) d -= 2.0 * std::min<double>(i, static_cast<double>(j + 1)) * rho[j];
    return d;
}

/// v_i^eff - v_i + sum_j k_ij rho_j (v_j^eff - v_i^eff), max norm.
inline double fixed_point_residual(std::span<const double> rho, std::span<const double> v_eff, const Kernel& kernel = {}) {
    double r = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        double e = v_eff[i] - kernel.speed(static_cast<int>(i + 1));
        for (std::size_t j = 0; j < rho.size(); ++j)
            e += kernel.kappa(static_cast<int>(i + 1), static_cast<int>(j + 1)) * rho[j] * (v_eff[j] - v_eff[i]);
        r = std::max(r, std::abs(e));
    }
    return r;
}

/// Solves M(rho) v_eff = v.
inline EffSpeeds effective_speeds(std::span<const double> rho, const Kernel& kernel = {}) {
    const auto mats = build_matrices(rho, kernel);
    const int I = static_cast<int>(rho.size());
    std::vector<double> v(static_cast<std::size_t>(I));
    for (int i = 0; i < I; ++i) v[static_cast<std::size_t>(i)] = kernel.speed(i + 1);
    EffSpeeds out;
    if (I == 0) return out;
    auto sol = solve(mats.M, v);
    out.v_eff = std::move(sol.x);
    out.det = sol.det;
    for (int i = 2; i <= I; ++i) out.det_lower_bound *= free_fraction(rho, i);
    const auto Mv = mats.M.apply(out.v_eff);
    for (int i = 0; i < I; ++i) out.matrix_residual = std::max(out.matrix_residual, std::abs(Mv[static_cast<std::size_t>(i)] - v[static_cast<std::size_t>(i)]));
    out.fixed_point_residual = fixed_point_residual(rho, out.v_eff, kernel);
    return out;
}

/// Allocation-free v_eff for the box-ball kernel, I <= kSmallSizes. Used in
/// inner loops; same elimination and refinement as effective_speeds.
inline constexpr int kSmallSizes = 16;

inline void effective_speeds_small(const double* rho, int I, double* v_eff) {
    if (I > kSmallSizes) throw schema_error("effective_speeds_small: too many sizes");
    double A[kSmallSizes][kSmallSizes], LU[kSmallSizes][kSmallSizes];
    int piv[kSmallSizes];
    for (int i = 0; i < I; ++i) {
        double diag = 1.0;
        for (int j = 0; j < I; ++j) {
            if (j == i) continue;
            const double k = 2.0 * std::min(i, j) + 2.0;
            A[i][j] = k * rho[j];
            diag -= A[i][j];
        }
        A[i][i] = diag;
    }
    for (int i = 0; i < I; ++i)
        for (int j = 0; j < I; ++j) LU[i][j] = A[i][j];
    for (int k = 0; k < I; ++k) {
        int p = k;
        for (int i = k + 1; i < I; ++i)
            if (std::abs(LU[i][k]) > std::abs(LU[p][k])) p = i;
        piv[k] = p;
        if (p != k)
            for (int j = 0; j < I; ++j) std::swap(LU[k][j], LU[p][j]);
        for (int i = k + 1; i < I; ++i) {
            LU[i][k] /= LU[k][k];
            for (int j = k + 1; j < I; ++j) LU[i][j] -= LU[i][k] * LU[k][j];
        }
    }
    auto substitute = [&](double* x) {
        for (int k = 0; k < I; ++k) std::swap(x[k], x[piv[k]]);
        for (int i = 1; i < I; ++i)
            for (int j = 0; j < i; ++j) x[i] -= LU[i][j] * x[j];
        for (int i = I - 1; i >= 0; --i) {
            for (int j = i + 1; j < I; ++j) x[i] -= LU[i][j] * x[j];
            x[i] /= LU[i][i];
        }
    };
    for (int i = 0; i < I; ++i) v_eff[i] = i + 1.0;
    substitute(v_eff);
    double r[kSmallSizes];
    for (int i = 0; i < I; ++i) {
        r[i] = i + 1.0;
        for (int j = 0; j < I; ++j) r[i] -= A[i][j] * v_eff[j];
    }
    substitute(r);
    for (int i = 0; i < I; ++i) v_eff[i] += r[i];
}

} // namespace bbs

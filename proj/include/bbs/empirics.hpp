#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <thread>
#include <vector>

#include "bbs/config.hpp"
#include "bbs/core.hpp"
#include "bbs/error.hpp"
#include "bbs/plf.hpp"
#include "bbs/scattering.hpp"
#include "bbs/soliton.hpp"

namespace bbs {

// ---------------------------------------------------------------- random numbers

/// splitmix64 finaliser.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based uniform in [0, 1) keyed by four integers, so a draw does not
/// depend on the order in which draws are made.
inline double counter_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = mix64(seed);
    h = mix64(h ^ a);
    h = mix64(h ^ (b * 0xd6e8feb86659fd93ULL));
    h = mix64(h ^ (c * 0xa0761d6478bd642fULL));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// ---------------------------------------------------------------- slot rates

/// Constant rate on [z_begin, z_end).
struct RateInterval {
    double z_begin = 0.0, z_end = 0.0, rate = 0.0;
};

/// Bernoulli rates pbar_i(z) on the effective scale, zero outside the listed
/// intervals.
struct SlotRateSpec {
    std::vector<std::vector<RateInterval>> rates;   // index i-1
    std::int64_t N = 1;
    std::uint64_t seed = 0;

    int sizes() const { return static_cast<int>(rates.size()); }

    double rate(int i, double z) const {
        for (const auto& r : rates[static_cast<std::size_t>(i - 1)])
            if (z >= r.z_begin && z < r.z_end) return r.rate;
        return 0.0;
    }

    double support_end() const {
        double e = 0.0;
        for (const auto& row : rates)
            for (const auto& r : row) e = std::max(e, r.z_end);
        return e;
    }

    void validate() const {
        if (rates.empty()) throw schema_error("slot rates: at least one size is required");
        if (N < 1) throw schema_error("slot rates: scale N must be positive");
        std::vector<double> cuts{0.0};
        for (const auto& row : rates) {
            for (const auto& r : row) {
                if (!(r.z_begin >= 0.0) || !(r.z_end > r.z_begin) || !std::isfinite(r.z_end))
                    throw schema_error("slot rates: intervals need 0 <= z_begin < z_end < inf");
                if (!(r.rate >= 0.0 && r.rate < 1.0)) throw domain_error("RateOutOfRange", "slot rates must lie in [0, 1)");
                cuts.push_back(r.z_begin);
                cuts.push_back(r.z_end);
            }
            for (std::size_t a = 0; a < row.size(); ++a)
                for (std::size_t b = a + 1; b < row.size(); ++b)
                    if (row[a].z_begin < row[b].z_end && row[b].z_begin < row[a].z_end)
                        throw schema_error("slot rates: intervals of one size overlap");
        }
        std::sort(cuts.begin(), cuts.end());
        for (double z : cuts) {
            double s = 0.0;
            for (int i = 1; i <= sizes(); ++i) s += i * rate(i, z);
            if (!(s < 0.5)) throw domain_error("RateOutOfRange", "slot rates: sum_i i pbar_i(z) must stay below 1/2");
        }
    }

    /// psibar0_i(z) = int_0^z pbar_i.
    IntegratedProfile target() const {
        IntegratedProfile out{{}, Frame::effective};
        for (const auto& row : rates) {
            std::vector<RateInterval> sorted = row;
            std::sort(sorted.begin(), sorted.end(), [](auto& x, auto& y) { return x.z_begin < y.z_begin; });
            std::vector<double> u{0.0}, f{0.0};
            for (const auto& r : sorted) {
                if (r.z_begin > u.back()) {
                    u.push_back(r.z_begin);
                    f.push_back(f.back());
                }
                f.push_back(f.back() + r.rate * (r.z_end - r.z_begin));
                u.push_back(r.z_end);
            }
            out.psi.emplace_back(std::move(u), std::move(f), 0.0);
        }
        return out;
    }
};

/// zeta_i(m) ~ Bernoulli(pbar_i(m / N)), independently; trial selects an
/// independent stream.
inline SlotDecomposition sample_slot_bernoulli(const SlotRateSpec& spec, std::uint64_t trial = 0) {
    spec.validate();
    const int I = spec.sizes();
    SlotDecomposition z(I);
    const auto N = static_cast<double>(spec.N);
    const auto last = static_cast<std::int64_t>(std::ceil(spec.support_end() * N)) + 1;
    for (int i = 1; i <= I; ++i)
        for (std::int64_t m = 1; m <= last; ++m) {
            const double p = spec.rate(i, static_cast<double>(m) / N);
            if (p > 0.0 && counter_uniform(spec.seed, trial, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(m)) < p)
                z.set(i, m, 1);
        }
    return z;
}

/// i.i.d. Bernoulli(p) occupation of sites 1..L.
inline BallConfig sample_iid_balls(double p, Site L, std::uint64_t seed) {
    if (!(p >= 0.0 && p < 0.5)) throw domain_error("RateOutOfRange", "ball density must lie in [0, 1/2)");
    if (L < 0) throw schema_error("window length must be non-negative");
    std::vector<std::uint8_t> occ(static_cast<std::size_t>(L));
    for (Site x = 1; x <= L; ++x) occ[static_cast<std::size_t>(x - 1)] = counter_uniform(seed, 0, 0, static_cast<std::uint64_t>(x)) < p;
    return BallConfig(std::move(occ));
}

// ---------------------------------------------------------------- empirical profiles

/// Rescaled cumulative soliton counts psi_i^N (spatial) or psibar_i^N
/// (effective): right-continuous step functions with jumps of 1/N.
struct EmpiricalProfile {
    std::vector<std::vector<double>> jumps;   // per size, sorted positions (repeated for multiplicity)
    double N = 1.0;
    double t = 0.0;
    Frame frame = Frame::spatial;

    int sizes() const { return static_cast<int>(jumps.size()); }

    double operator()(int i, double u) const {
        const auto& j = jumps[static_cast<std::size_t>(i - 1)];
        return static_cast<double>(std::upper_bound(j.begin(), j.end(), u) - j.begin()) / N;
    }

    /// sup over [0, u0] of |psi^N_i - f|, exact for continuous
    /// non-decreasing f (extremes sit at jumps and their left limits).
    double sup_error(int i, const PiecewiseLinear& f, double u0) const {
        const auto& j = jumps[static_cast<std::size_t>(i - 1)];
        double e = std::abs((*this)(i, 0.0) - f(0.0));
        e = std::max(e, std::abs((*this)(i, u0) - f(u0)));
        std::size_t k = 0;
        while (k < j.size() && j[k] <= u0) {
            const double p = j[k];
            const double left = static_cast<double>(k) / N;
            while (k < j.size() && j[k] == p) ++k;
            const double right = static_cast<double>(k) / N;
            const double fp = f(p);
            e = std::max({e, std::abs(left - fp), std::abs(right - fp)});
        }
        return e;
    }
};

inline EmpiricalProfile spatial_profile(const SolitonMarks& marks, int I, double N, double t = 0.0) {
    EmpiricalProfile p;
    p.N = N;
    p.t = t;
    p.frame = Frame::spatial;
    p.jumps.resize(static_cast<std::size_t>(std::max(I, marks.max_size())));
    for (const auto& s : marks.solitons) p.jumps[static_cast<std::size_t>(s.size - 1)].push_back(static_cast<double>(s.start()) / N);
    for (auto& j : p.jumps) std::sort(j.begin(), j.end());
    return p;
}

inline EmpiricalProfile effective_profile(const SlotDecomposition& z, int I, double N, double t = 0.0) {
    EmpiricalProfile p;
    p.N = N;
    p.t = t;
    p.frame = Frame::effective;
    p.jumps.resize(static_cast<std::size_t>(std::max(I, z.max_size())));
    for (int i = 1; i <= z.max_size(); ++i) {
        const auto row = z.row(i);
        for (std::size_t m = 0; m < row.size(); ++m)
            for (std::int64_t c = 0; c < row[m]; ++c) p.jumps[static_cast<std::size_t>(i - 1)].push_back(static_cast<double>(m + 1) / N);
    }
    return p;
}

enum class EvolutionPath { carrier, slots, both };

/// Configuration after k steps. With `both`, the carrier and the slot shift
/// are run and compared.
inline BallConfig evolve_by(const BallConfig& config, std::int64_t k, EvolutionPath path) {
    if (path == EvolutionPath::carrier) return evolve(config, k);
    auto via_slots = reconstruct(shift_slots(slot_decompose(config), k));
    if (path == EvolutionPath::both && !(evolve(config, k) == via_slots))
        throw internal_error("carrier evolution and slot shift disagree");
    return via_slots;
}

/// psi_i^N(., t) or psibar_i^N(., t) after floor(N t) steps.
inline EmpiricalProfile empirical_integrated(const BallConfig& config, double N, double t, Frame frame,
                                             EvolutionPath path = EvolutionPath::both) {
    if (!(N > 0.0) || !(t >= 0.0)) throw schema_error("empirical profile: need N > 0 and t >= 0");
    const auto k = static_cast<std::int64_t>(std::floor(N * t));
    const auto eta = evolve_by(config, k, path);
    const auto marks = decompose(eta);
    if (frame == Frame::spatial) return spatial_profile(marks, marks.max_size(), N, t);
    return effective_profile(slot_decompose(marks, slot_profile(marks, carrier(eta))), marks.max_size(), N, t);
}

// ---------------------------------------------------------------- two-scale bounds

struct ScaleBoundReport {
    int I = 0;
    std::int64_t record_gap = 0;      ///< max |(x + 1) - R(x) - sum_j 2 j C_j(x)|, bound I(2I-1); sites 0..x against records 0..x
    std::int64_t slot_record = 0;     ///< max |S_i(x) - R(x) - sum_{j>i} 2(j-i) C_j(x)|, bound 2(I-1)^2
    std::int64_t slot_distance = 0;   ///< max |S_i(x) - N phi_i^N(x/N)|, bound 4 I^2
    std::int64_t particles = 0;       ///< max |#balls <= x - sum_i i C_i(x)|, bound I^2
    std::int64_t violations = 0;

    bool ok() const { return violations == 0; }
};

/// Evaluates the deterministic two-scale bounds at every site of the
/// configuration (up to its closing record). C_j(x) counts size-j solitons
/// starting at or before x.
inline ScaleBoundReport check_scale_bounds(const BallConfig& config, int I, bool throw_on_violation = true) {
    const auto path = carrier(config);
    const auto marks = decompose(config);
    if (marks.max_size() > I) throw domain_error("SizeHintViolated", "configuration holds solitons larger than I");
    const auto prof = slot_profile(marks, path, I);
    ScaleBoundReport r;
    r.I = I;
    const Site L = path.length();
    std::vector<std::int64_t> starts_at(static_cast<std::size_t>(L + 1) * static_cast<std::size_t>(I), 0);
    for (const auto& s : marks.solitons) ++starts_at[static_cast<std::size_t>(s.start()) * static_cast<std::size_t>(I) + static_cast<std::size_t>(s.size - 1)];
    std::vector<std::int64_t> C(static_cast<std::size_t>(I) + 1, 0);
    std::int64_t balls = 0;
    const std::int64_t b1 = I * (2 * I - 1), b2 = 2 * (I - 1) * (I - 1), b3 = 4 * I * I, b4 = I * I;
    for (Site x = 0; x <= L; ++x) {
        for (int j = 1; j <= I; ++j) C[static_cast<std::size_t>(j)] += starts_at[static_cast<std::size_t>(x) * static_cast<std::size_t>(I) + static_cast<std::size_t>(j - 1)];
        balls += config.at(x);
        const std::int64_t R = path.record_count(x);
        std::int64_t mass = 0, weighted = 0;
        for (int j = 1; j <= I; ++j) {
            mass += 2 * j * C[static_cast<std::size_t>(j)];
            weighted += j * C[static_cast<std::size_t>(j)];
        }
        const std::int64_t e1 = std::abs(x + 1 - R - mass);
        const std::int64_t e4 = std::abs(balls - weighted);
        r.record_gap = std::max(r.record_gap, e1);
        r.particles = std::max(r.particles, e4);
        r.violations += (e1 > b1) + (e4 > b4);
        for (int i = 1; i <= I; ++i) {
            const std::int64_t S = prof.count(i, x);
            std::int64_t above = 0, phi = x;
            for (int j = 1; j <= I; ++j) {
                if (j > i) above += 2 * (j - i) * C[static_cast<std::size_t>(j)];
                phi -= 2 * std::min(i, j) * C[static_cast<std::size_t>(j)];
            }
            const std::int64_t e2 = std::abs(S - R - above);
            const std::int64_t e3 = std::abs(S - phi);
            r.slot_record = std::max(r.slot_record, e2);
            r.slot_distance = std::max(r.slot_distance, e3);
            r.violations += (e2 > b2) + (e3 > b3);
        }
    }
    if (throw_on_violation && r.violations > 0) throw internal_error("two-scale bound violated");
    return r;
}

/// psibar_i^N predicted from the spatial profile: each size-i soliton starting
/// at x is placed at N phi_i^N(x / N) = x - sum_j 2(i^j) C_j(x).
inline EmpiricalProfile empirical_scatter(const BallConfig& config, double N) {
    const auto marks = decompose(config);
    const int I = marks.max_size();
    EmpiricalProfile p;
    p.N = N;
    p.frame = Frame::effective;
    p.jumps.resize(static_cast<std::size_t>(I));
    std::vector<std::int64_t> C(static_cast<std::size_t>(I) + 1, 0);
    // solitons are sorted by start; C_j(x) includes every soliton starting at or before x
    std::size_t k = 0;
    while (k < marks.solitons.size()) {
        const Site x = marks.solitons[k].start();
        std::size_t e = k;
        while (e < marks.solitons.size() && marks.solitons[e].start() == x) ++C[static_cast<std::size_t>(marks.solitons[e++].size)];
        for (std::size_t q = k; q < e; ++q) {
            const int i = marks.solitons[q].size;
            std::int64_t phi = x;
            for (int j = 1; j <= I; ++j) phi -= 2 * std::min(i, j) * C[static_cast<std::size_t>(j)];
            p.jumps[static_cast<std::size_t>(i - 1)].push_back(static_cast<double>(phi) / N);
        }
        k = e;
    }
    for (auto& j : p.jumps) std::sort(j.begin(), j.end());
    return p;
}

// ---------------------------------------------------------------- convergence sweep

struct ConvergenceRow {
    std::int64_t N = 0;
    int size = 0;
    std::int64_t trial = 0;
    double t = 0.0;
    double sup_error = 0.0;
    std::uint64_t seed = 0;
};

struct SweepOptions {
    std::vector<std::int64_t> N_list;
    std::vector<double> times;
    double u0 = 1.0;
    int trials = 1;
    unsigned threads = 1;
    /// Run the carrier next to the slot shift and compare when floor(N t)
    /// does not exceed this many steps.
    std::int64_t dual_check_steps = 1000;
};

/// For every N, trial and time: sample slots, rebuild the configuration,
/// evolve floor(N t) steps and measure sup_{u <= u0} |psi_i^N - psi_i| against
/// the continuum flow started from psibar0_i = int pbar_i.
inline std::vector<ConvergenceRow> convergence_sweep(SlotRateSpec spec, const SweepOptions& opt) {
    spec.validate();
    if (opt.trials < 1 || opt.N_list.empty() || opt.times.empty()) throw schema_error("convergence sweep: need N values, times and trials");
    if (!(opt.u0 > 0.0)) throw schema_error("convergence sweep: u0 must be positive");
    const int I = spec.sizes();
    const auto psibar0 = spec.target();
    if (!check_domain(psibar0).member) throw domain_error("NotInDomainD", "slot rates give a profile outside the effective domain");
    std::vector<IntegratedProfile> limit;
    for (double t : opt.times) {
        if (!(t >= 0.0)) throw schema_error("convergence sweep: times must be non-negative");
        limit.push_back(unscatter(free_shift(psibar0, t)));
    }

    struct Job {
        std::int64_t N;
        int trial;
    };
    std::vector<Job> jobs;
    for (auto N : opt.N_list) {
        if (N < 1) throw schema_error("convergence sweep: N must be positive");
        for (int tr = 0; tr < opt.trials; ++tr) jobs.push_back({N, tr});
    }

    std::vector<ConvergenceRow> rows;
    std::mutex mu;
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    auto worker = [&] {
        try {
            for (std::size_t j; (j = next++) < jobs.size();) {
                auto s = spec;
                s.N = jobs[j].N;
                const auto zeta = sample_slot_bernoulli(s, static_cast<std::uint64_t>(jobs[j].trial));
                const auto eta0 = reconstruct(zeta);
                std::vector<ConvergenceRow> local;
                for (std::size_t q = 0; q < opt.times.size(); ++q) {
                    const double t = opt.times[q];
                    const auto k = static_cast<std::int64_t>(std::floor(static_cast<double>(s.N) * t));
                    auto eta = reconstruct(shift_slots(zeta, k));
                    if (k <= opt.dual_check_steps && !(evolve(eta0, k) == eta))
                        throw internal_error("carrier evolution and slot shift disagree");
                    const auto emp = spatial_profile(decompose(eta), I, static_cast<double>(s.N), t);
                    for (int i = 1; i <= I; ++i)
                        local.push_back({s.N, i, jobs[j].trial, t, emp.sup_error(i, limit[q][i], opt.u0), spec.seed});
                }
                std::lock_guard lock(mu);
                rows.insert(rows.end(), local.begin(), local.end());
            }
        } catch (...) {
            std::lock_guard lock(mu);
            if (!failure) failure = std::current_exception();
            next = jobs.size();
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(jobs.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < n_threads; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    std::sort(rows.begin(), rows.end(), [](const ConvergenceRow& a, const ConvergenceRow& b) {
        return std::tie(a.N, a.t, a.size, a.trial) < std::tie(b.N, b.t, b.size, b.trial);
    });
    return rows;
}

/// Median sup error for one (N, size, t) cell of a sweep.
inline double median_error(const std::vector<ConvergenceRow>& rows, std::int64_t N, int size, double t) {
    std::vector<double> e;
    for (const auto& r : rows)
        if (r.N == N && r.size == size && r.t == t) e.push_back(r.sup_error);
    if (e.empty()) throw schema_error("median_error: no rows for the requested cell");
    std::sort(e.begin(), e.end());
    const std::size_t n = e.size();
    return n % 2 ? e[n / 2] : 0.5 * (e[n / 2 - 1] + e[n / 2]);
}

} // namespace bbs

#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "bbs/config.hpp"
#include "bbs/error.hpp"

namespace bbs {

/// Path encoding of a configuration together with the carrier load.
///
/// All arrays are indexed by x = 0..length. The encoding runs past the stored
/// window up to the first record at or after it, so the last index is always
/// a record and every excursion is closed.
struct PathEncoding {
    std::vector<std::int64_t> S;   ///< walk, S(0) = 0, steps 1 - 2 eta(x)
    std::vector<std::int64_t> M;   ///< running maximum of S
    std::vector<std::int64_t> W;   ///< carrier load
    std::vector<Site> records;     ///< sorted; always starts with 0

    Site length() const noexcept { return static_cast<Site>(W.size()) - 1; }

    /// Number of records in [0, x]; equals M(x) + 1.
    std::int64_t record_count(Site x) const { return M[static_cast<std::size_t>(x)] + 1; }

    bool is_record(Site x) const {
        return x == 0 || (W[static_cast<std::size_t>(x)] == 0 && W[static_cast<std::size_t>(x - 1)] == 0);
    }
};

/// One carrier pass. W is evaluated with the three-case pick-up/drop-off
/// recursion and cross-checked against the path identity W = M - S.
inline PathEncoding carrier(const BallConfig& config) {
    const Site n = config.window();
    PathEncoding p;
    p.S.reserve(static_cast<std::size_t>(n) + 2);
    p.S.push_back(0);
    p.M.push_back(0);
    p.W.push_back(0);
    p.records.push_back(0);

    Site x = 0;
    // Run to the end of the window, then over empty boxes until a record.
    while (x < n || !p.is_record(x)) {
        ++x;
        const int eta = config.at(x);
        const std::int64_t w_prev = p.W.back();
        const std::int64_t w = eta == 1 ? w_prev + 1 : (w_prev > 0 ? w_prev - 1 : 0);
        const std::int64_t s = p.S.back() + 1 - 2 * eta;
        const std::int64_t m = std::max(p.M.back(), s);
        if (w != m - s) throw internal_error("carrier recursion disagrees with M - S");
        p.S.push_back(s);
        p.M.push_back(m);
        p.W.push_back(w);
        if (w == 0 && w_prev == 0) p.records.push_back(x);
    }
    return p;
}

namespace detail {

/// T applied to `in`, written to `out`. Leading empty boxes are skipped since
/// the carrier is empty there. The output is trimmed to its last ball.
inline void step_into(const std::vector<std::uint8_t>& in, std::vector<std::uint8_t>& out) {
    const std::size_t n = in.size();
    out.assign(n, 0);
    auto first = std::find(in.begin(), in.end(), std::uint8_t{1});
    std::int64_t w = 0;
    for (std::size_t k = static_cast<std::size_t>(first - in.begin()); k < n; ++k) {
        const std::uint8_t eta = in[k];
        // T eta(x) = min{1 - eta(x), W(x - 1)}
        out[k] = (eta == 0 && w > 0) ? 1 : 0;
        w = eta ? w + 1 : (w > 0 ? w - 1 : 0);
    }
    // Remaining load is dropped one ball per empty box past the window.
    out.resize(n + static_cast<std::size_t>(w), 1);
    while (!out.empty() && out.back() == 0) out.pop_back();
}

} // namespace detail

/// One time step of the box-ball system. The window grows as needed so that
/// no ball is lost.
inline BallConfig step(const BallConfig& config) {
    std::vector<std::uint8_t> in(config.occupancy().begin(), config.occupancy().end());
    std::vector<std::uint8_t> out;
    detail::step_into(in, out);
    return BallConfig(std::move(out), config.max_size_hint());
}

/// k-fold application of step.
inline BallConfig evolve(const BallConfig& config, std::int64_t k) {
    if (k < 0) throw schema_error("evolve: number of steps must be non-negative");
    std::vector<std::uint8_t> a(config.occupancy().begin(), config.occupancy().end());
    std::vector<std::uint8_t> b;
    for (std::int64_t s = 0; s < k; ++s) {
        detail::step_into(a, b);
        a.swap(b);
    }
    return BallConfig(std::move(a), config.max_size_hint());
}

} // namespace bbs

#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <vector>

#include "bbs/config.hpp"
#include "bbs/core.hpp"
#include "bbs/error.hpp"

namespace bbs {

/// One identified soliton: its size and the 2*size sites it occupies.
struct Soliton {
    int size = 0;
    std::vector<Site> sites;   ///< strictly increasing, 2*size entries

    Site start() const { return sites.front(); }
};

/// Result of the soliton identification: every non-record site belongs to
/// exactly one soliton. Solitons are ordered by start site.
struct SolitonMarks {
    std::vector<Soliton> solitons;

    int max_size() const {
        int m = 0;
        for (const auto& s : solitons) m = std::max(m, s.size);
        return m;
    }

    /// Start sites of the size-i solitons, ascending.
    std::vector<Site> starts(int size) const {
        std::vector<Site> out;
        for (const auto& s : solitons)
            if (s.size == size) out.push_back(s.start());
        return out;
    }

    /// sigma_i(x): one if a size-i soliton starts at x.
    bool sigma(int size, Site x) const {
        for (const auto& s : solitons)
            if (s.size == size && s.start() == x) return true;
        return false;
    }

    std::int64_t count(int size) const {
        return std::count_if(solitons.begin(), solitons.end(), [size](const Soliton& s) { return s.size == size; });
    }
};

namespace detail {

struct SiteBit {
    Site site;
    std::uint8_t bit;
};

/// Excursions of the carrier between consecutive records: the sites strictly
/// between them, with their occupations.
inline std::vector<std::vector<SiteBit>> excursions(const BallConfig& config, const PathEncoding& path) {
    std::vector<std::vector<SiteBit>> out;
    for (std::size_t r = 0; r + 1 < path.records.size(); ++r) {
        const Site lo = path.records[r];
        const Site hi = path.records[r + 1];
        if (hi - lo <= 1) continue;
        std::vector<SiteBit> ex;
        ex.reserve(static_cast<std::size_t>(hi - lo - 1));
        for (Site x = lo + 1; x < hi; ++x) ex.push_back({x, static_cast<std::uint8_t>(config.at(x))});
        out.push_back(std::move(ex));
    }
    return out;
}

/// Literal left-most-run grouping on one excursion. Quadratic in the worst
/// case; kept as the reference for the stack matcher.
inline void group_excursion_literal(std::vector<SiteBit> rest, std::vector<Soliton>& out) {
    while (!rest.empty()) {
        // Maximal runs of the remaining sequence.
        std::vector<std::size_t> run_start;
        for (std::size_t k = 0; k < rest.size(); ++k)
            if (k == 0 || rest[k].bit != rest[k - 1].bit) run_start.push_back(k);
        run_start.push_back(rest.size());

        bool found = false;
        for (std::size_t r = 0; r + 2 < run_start.size(); ++r) {
            const std::size_t len = run_start[r + 1] - run_start[r];
            const std::size_t next_len = run_start[r + 2] - run_start[r + 1];
            if (len > next_len) continue;
            Soliton s;
            s.size = static_cast<int>(len);
            std::vector<SiteBit> kept;
            kept.reserve(rest.size() - 2 * len);
            for (std::size_t k = 0; k < rest.size(); ++k) {
                const bool in_first = k >= run_start[r] && k < run_start[r + 1];
                const bool in_second = k >= run_start[r + 1] && k < run_start[r + 1] + len;
                if (in_first || in_second) s.sites.push_back(rest[k].site);
                else kept.push_back(rest[k]);
            }
            out.push_back(std::move(s));
            rest = std::move(kept);
            found = true;
            break;
        }
        if (!found) throw internal_error("soliton grouping stalled on an unbalanced excursion");
    }
}

/// Stack form of the same grouping. Runs on the stack have strictly
/// decreasing lengths, so the only candidate for the left-most match is the
/// top of the stack against the incoming run.
inline void group_excursion_stack(const std::vector<SiteBit>& ex, std::vector<Soliton>& out) {
    struct Run {
        std::uint8_t bit;
        std::deque<Site> sites;
    };
    std::vector<Run> stack;
    std::size_t k = 0;
    while (k < ex.size()) {
        Run cur{ex[k].bit, {}};
        while (k < ex.size() && ex[k].bit == cur.bit) cur.sites.push_back(ex[k++].site);

        while (true) {
            if (stack.empty() || stack.back().sites.size() > cur.sites.size()) {
                stack.push_back(std::move(cur));
                break;
            }
            Run top = std::move(stack.back());
            stack.pop_back();
            const std::size_t len = top.sites.size();
            Soliton s;
            s.size = static_cast<int>(len);
            s.sites.assign(top.sites.begin(), top.sites.end());
            for (std::size_t j = 0; j < len; ++j) {
                s.sites.push_back(cur.sites.front());
                cur.sites.pop_front();
            }
            out.push_back(std::move(s));
            if (cur.sites.empty()) break;
            if (!stack.empty()) {
                // The run below the removed one has the same bit as what is
                // left of the incoming run; they now form one run.
                Run merged = std::move(stack.back());
                stack.pop_back();
                merged.sites.insert(merged.sites.end(), cur.sites.begin(), cur.sites.end());
                cur = std::move(merged);
            }
        }
    }
    if (!stack.empty()) throw internal_error("soliton grouping left unmatched runs");
}

inline void sort_by_start(std::vector<Soliton>& s) {
    std::sort(s.begin(), s.end(), [](const Soliton& a, const Soliton& b) { return a.start() < b.start(); });
}

} // namespace detail

/// Soliton identification by the literal left-most-run rule.
inline SolitonMarks decompose_literal(const BallConfig& config) {
    const PathEncoding path = carrier(config);
    SolitonMarks marks;
    for (auto& ex : detail::excursions(config, path)) detail::group_excursion_literal(std::move(ex), marks.solitons);
    detail::sort_by_start(marks.solitons);
    return marks;
}

/// Soliton identification, stack-based; agrees with decompose_literal.
inline SolitonMarks decompose(const BallConfig& config) {
    const PathEncoding path = carrier(config);
    SolitonMarks marks;
    for (const auto& ex : detail::excursions(config, path)) detail::group_excursion_stack(ex, marks.solitons);
    detail::sort_by_start(marks.solitons);
    return marks;
}

/// nu(x) and cumulative slot counts S_i(x).
///
/// Arrays cover x = 0..length(). Every site beyond is a record, so
/// count(i, x) keeps growing by one per site there.
struct SlotProfile {
    static constexpr int kRecord = std::numeric_limits<int>::max();

    std::vector<int> nu;                           ///< kRecord at records
    std::vector<std::vector<std::int64_t>> S;      ///< S[i-1][x], i = 1..max_size()

    Site length() const { return static_cast<Site>(nu.size()) - 1; }
    int max_size() const { return static_cast<int>(S.size()); }

    int nu_at(Site x) const { return x <= length() ? nu[static_cast<std::size_t>(x)] : kRecord; }

    /// S_i(x) for any i >= 1 and x >= 0.
    std::int64_t count(int i, Site x) const {
        const Site L = length();
        if (x > L) return count(i, L) + (x - L);
        if (i <= max_size()) return S[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(x)];
        std::int64_t c = 0;
        for (Site y = 0; y <= x; ++y) c += nu[static_cast<std::size_t>(y)] >= i;
        return c;
    }
};

/// Builds nu and S_i from an identification; rows are kept for sizes
/// 1..max(max_size, 1).
inline SlotProfile slot_profile(const SolitonMarks& marks, const PathEncoding& path, int max_size = 0) {
    SlotProfile p;
    const Site L = path.length();
    p.nu.assign(static_cast<std::size_t>(L) + 1, SlotProfile::kRecord);
    Site covered = 0;
    for (const auto& s : marks.solitons) {
        for (int q = 0; q < 2 * s.size; ++q) {
            const Site x = s.sites[static_cast<std::size_t>(q)];
            if (x > L) throw internal_error("soliton site beyond the path encoding");
            // Position q+1 within the soliton: value q for the first run,
            // q - size for the second.
            p.nu[static_cast<std::size_t>(x)] = q < s.size ? q : q - s.size;
            ++covered;
        }
    }
    const auto records = static_cast<Site>(path.records.size());
    if (covered + records != L + 1) throw internal_error("sites neither record nor soliton");

    const int I = std::max({1, max_size, marks.max_size()});
    p.S.assign(static_cast<std::size_t>(I), std::vector<std::int64_t>(static_cast<std::size_t>(L) + 1, 0));
    for (int i = 1; i <= I; ++i) {
        auto& row = p.S[static_cast<std::size_t>(i - 1)];
        std::int64_t c = 0;
        for (Site x = 0; x <= L; ++x) {
            c += p.nu[static_cast<std::size_t>(x)] >= i;
            row[static_cast<std::size_t>(x)] = c;
        }
    }
    return p;
}

inline SlotProfile slot_profile(const BallConfig& config) {
    return slot_profile(decompose(config), carrier(config), config.max_size_hint().value_or(0));
}

/// zeta_i(m): number of size-i solitons in the m-th i-slot (m >= 1).
/// Finitely supported; entries outside the stored rows are zero.
class SlotDecomposition {
public:
    SlotDecomposition() = default;
    explicit SlotDecomposition(int max_size) {
        if (max_size < 0) throw schema_error("slot decomposition size must be non-negative");
        rows_.resize(static_cast<std::size_t>(max_size));
    }

    int max_size() const noexcept { return static_cast<int>(rows_.size()); }

    std::int64_t at(int i, std::int64_t m) const {
        if (i < 1 || i > max_size() || m < 1) return 0;
        const auto& row = rows_[static_cast<std::size_t>(i - 1)];
        return m <= static_cast<std::int64_t>(row.size()) ? row[static_cast<std::size_t>(m - 1)] : 0;
    }

    void set(int i, std::int64_t m, std::int64_t count) {
        if (i < 1 || m < 1 || count < 0) throw schema_error("slot index must be >= 1 and counts >= 0");
        if (i > max_size()) rows_.resize(static_cast<std::size_t>(i));
        auto& row = rows_[static_cast<std::size_t>(i - 1)];
        if (m > static_cast<std::int64_t>(row.size())) {
            if (count == 0) return;
            row.resize(static_cast<std::size_t>(m), 0);
        }
        row[static_cast<std::size_t>(m - 1)] = count;
    }

    void add(int i, std::int64_t m, std::int64_t count = 1) { set(i, m, at(i, m) + count); }

    /// Row i as stored (index m-1); may carry trailing zeros.
    std::span<const std::int64_t> row(int i) const {
        if (i < 1 || i > max_size()) return {};
        return rows_[static_cast<std::size_t>(i - 1)];
    }

    /// One past the last slot index with a non-zero entry in row i.
    std::int64_t row_extent(int i) const {
        auto r = row(i);
        std::int64_t e = static_cast<std::int64_t>(r.size());
        while (e > 0 && r[static_cast<std::size_t>(e - 1)] == 0) --e;
        return e;
    }

    /// Largest size with a non-zero entry, or 0.
    int occupied_size() const {
        for (int i = max_size(); i >= 1; --i)
            if (row_extent(i) > 0) return i;
        return 0;
    }

    std::int64_t total(int i) const {
        std::int64_t t = 0;
        for (auto c : row(i)) t += c;
        return t;
    }

    std::int64_t total() const {
        std::int64_t t = 0;
        for (int i = 1; i <= max_size(); ++i) t += total(i);
        return t;
    }

    friend bool operator==(const SlotDecomposition& a, const SlotDecomposition& b) {
        const int I = std::max(a.max_size(), b.max_size());
        for (int i = 1; i <= I; ++i) {
            const std::int64_t e = std::max(a.row_extent(i), b.row_extent(i));
            for (std::int64_t m = 1; m <= e; ++m)
                if (a.at(i, m) != b.at(i, m)) return false;
        }
        return true;
    }

private:
    std::vector<std::vector<std::int64_t>> rows_;
};

/// Slot decomposition from an identification and its slot profile.
inline SlotDecomposition slot_decompose(const SolitonMarks& marks, const SlotProfile& profile) {
    SlotDecomposition z(profile.max_size());
    for (const auto& s : marks.solitons) z.add(s.size, profile.count(s.size, s.start()));
    return z;
}

inline SlotDecomposition slot_decompose(const BallConfig& config) {
    const SolitonMarks marks = decompose(config);
    const SlotProfile profile = slot_profile(marks, carrier(config), config.max_size_hint().value_or(0));
    return slot_decompose(marks, profile);
}

/// Spatial reconstruction from a slot decomposition; inverse of
/// slot_decompose.
///
/// Works one excursion at a time. Starting from the record that opens the
/// excursion, sizes are inserted from the largest present in the first slot
/// downwards; a size-j soliton placed after a j-slot holding a ball is
/// written 0..01..1, otherwise 1..10..0. Once every size is placed, the
/// slots used by the excursion are consumed and the next record opens a new
/// one.
inline BallConfig reconstruct(const SlotDecomposition& slots) {
    struct Cell {
        std::uint8_t bit;
        int nu;
    };
    const int I = slots.occupied_size();
    std::int64_t remaining = slots.total();
    std::vector<std::int64_t> used(static_cast<std::size_t>(I) + 1, 0);   // slots consumed per size
    std::vector<std::uint8_t> occ;
    std::vector<Cell> seg;
    std::vector<Cell> next;
    bool first = true;

    while (remaining > 0) {
        seg.assign(1, Cell{0, SlotProfile::kRecord});
        int top = 0;
        for (int i = I; i >= 1; --i) {
            if (slots.at(i, used[static_cast<std::size_t>(i)] + 1) > 0) {
                top = i;
                break;
            }
        }
        for (int j = top; j >= 1; --j) {
            next.clear();
            std::int64_t m = 0;
            for (const Cell& c : seg) {
                next.push_back(c);
                if (c.nu < j) continue;
                ++m;
                const std::int64_t n = slots.at(j, used[static_cast<std::size_t>(j)] + m);
                const std::uint8_t lead = c.bit ? 0 : 1;
                for (std::int64_t r = 0; r < n; ++r) {
                    for (int q = 0; q < j; ++q) next.push_back(Cell{lead, q});
                    for (int q = 0; q < j; ++q) next.push_back(Cell{static_cast<std::uint8_t>(1 - lead), q});
                }
                remaining -= n;
            }
            seg.swap(next);
        }
        for (int i = 1; i <= I; ++i) {
            used[static_cast<std::size_t>(i)] +=
                std::count_if(seg.begin(), seg.end(), [i](const Cell& c) { return c.nu >= i; });
        }
        if (!first) occ.push_back(0);   // the record opening this excursion
        for (std::size_t k = 1; k < seg.size(); ++k) occ.push_back(seg[k].bit);
        first = false;
    }
    if (remaining != 0) throw internal_error("reconstruction consumed a different number of solitons");
    while (!occ.empty() && occ.back() == 0) occ.pop_back();
    BallConfig out(std::move(occ));
    if (slots.max_size() > 0) out.set_max_size_hint(slots.max_size());
    return out;
}

/// Linear slot dynamics: row i moves forward by i*k slots.
inline SlotDecomposition shift_slots(const SlotDecomposition& slots, std::int64_t k) {
    if (k < 0) throw schema_error("shift_slots: number of steps must be non-negative");
    SlotDecomposition out(slots.max_size());
    for (int i = 1; i <= slots.max_size(); ++i) {
        const auto r = slots.row(i);
        for (std::size_t m = 0; m < r.size(); ++m)
            if (r[m] != 0) out.set(i, static_cast<std::int64_t>(m) + 1 + i * k, r[m]);
    }
    return out;
}

/// Throws a domain error if the configuration carries a soliton larger than
/// its max_size_hint.
inline void check_size_hint(const BallConfig& config) {
    if (!config.max_size_hint()) return;
    const int m = decompose(config).max_size();
    if (m > *config.max_size_hint())
        throw domain_error("SizeHintViolated", "configuration contains a soliton of size " + std::to_string(m) +
                                                   " above max_size_hint " +
                                                   std::to_string(*config.max_size_hint()));
}

} // namespace bbs

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bbs/error.hpp"

namespace bbs {

/// Spatial site index. Sites of a configuration start at 1; site 0 is the
/// left boundary and always acts as a record.
using Site = std::int64_t;

/// A finitely supported box-ball configuration on the positive integers.
///
/// Only a finite window is stored; every site past the window is empty.
/// Equality ignores the window length and compares supports.
class BallConfig {
public:
    BallConfig() = default;

    explicit BallConfig(std::vector<std::uint8_t> occupancy, std::optional<int> max_size_hint = {})
        : occ_(std::move(occupancy)), max_size_hint_(max_size_hint) {
        for (auto b : occ_) {
            if (b > 1) throw schema_error("occupancy entries must be 0 or 1");
        }
        if (max_size_hint_ && *max_size_hint_ < 1) throw schema_error("max_size_hint must be positive");
    }

    /// Parses a line of '0'/'1' characters, site 1 first. Surrounding
    /// whitespace (including a trailing newline) is ignored.
    static BallConfig from_string(std::string_view text) {
        std::vector<std::uint8_t> occ;
        occ.reserve(text.size());
        auto first = text.find_first_not_of(" \t\r\n");
        auto last = text.find_last_not_of(" \t\r\n");
        if (first == std::string_view::npos) return BallConfig{};
        for (char c : text.substr(first, last - first + 1)) {
            if (c == '0') occ.push_back(0);
            else if (c == '1') occ.push_back(1);
            else throw schema_error(std::string("unexpected character in configuration text: '") + c + "'");
        }
        return BallConfig(std::move(occ));
    }

    /// Builds a configuration with balls exactly at the given (1-based) sites.
    static BallConfig from_sites(std::span<const Site> sites) {
        Site top = 0;
        for (Site s : sites) {
            if (s < 1) throw schema_error("ball sites must be >= 1");
            top = std::max(top, s);
        }
        std::vector<std::uint8_t> occ(static_cast<std::size_t>(top), 0);
        for (Site s : sites) occ[static_cast<std::size_t>(s - 1)] = 1;
        return BallConfig(std::move(occ));
    }

    /// Number of stored sites.
    Site window() const noexcept { return static_cast<Site>(occ_.size()); }

    /// Occupation of site x (x >= 1); zero outside the stored window.
    int at(Site x) const noexcept {
        return (x >= 1 && x <= window()) ? occ_[static_cast<std::size_t>(x - 1)] : 0;
    }

    std::span<const std::uint8_t> occupancy() const noexcept { return occ_; }

    std::optional<int> max_size_hint() const noexcept { return max_size_hint_; }
    void set_max_size_hint(std::optional<int> hint) {
        if (hint && *hint < 1) throw schema_error("max_size_hint must be positive");
        max_size_hint_ = hint;
    }

    std::int64_t ball_count() const noexcept {
        return std::count(occ_.begin(), occ_.end(), std::uint8_t{1});
    }

    std::vector<Site> ball_sites() const {
        std::vector<Site> out;
        for (std::size_t k = 0; k < occ_.size(); ++k)
            if (occ_[k]) out.push_back(static_cast<Site>(k + 1));
        return out;
    }

    /// Index of the last occupied site, or 0 for the empty configuration.
    Site last_ball() const noexcept {
        for (std::size_t k = occ_.size(); k > 0; --k)
            if (occ_[k - 1]) return static_cast<Site>(k);
        return 0;
    }

    BallConfig trimmed() const {
        BallConfig out = *this;
        out.occ_.resize(static_cast<std::size_t>(last_ball()));
        return out;
    }

    /// Pads (never truncates) the stored window with empty boxes.
    BallConfig padded_to(Site length) const {
        BallConfig out = *this;
        if (length > window()) out.occ_.resize(static_cast<std::size_t>(length), 0);
        return out;
    }

    /// The stored window as '0'/'1' characters.
    std::string to_string() const {
        std::string s(occ_.size(), '0');
        for (std::size_t k = 0; k < occ_.size(); ++k)
            if (occ_[k]) s[k] = '1';
        return s;
    }

    friend bool operator==(const BallConfig& a, const BallConfig& b) noexcept {
        const Site n = std::max(a.window(), b.window());
        for (Site x = 1; x <= n; ++x)
            if (a.at(x) != b.at(x)) return false;
        return true;
    }

private:
    std::vector<std::uint8_t> occ_;
    std::optional<int> max_size_hint_;
};

} // namespace bbs

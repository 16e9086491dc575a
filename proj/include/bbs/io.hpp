#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bbs/config.hpp"
#include "bbs/empirics.hpp"
#include "bbs/error.hpp"
#include "bbs/hydro.hpp"
#include "bbs/plf.hpp"
#include "bbs/scattering.hpp"
#include "bbs/soliton.hpp"

namespace bbs::io {

using json = nlohmann::json;

/// Shortest text that is guaranteed to round-trip: 17 significant digits.
inline std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw schema_error("cannot open input file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw schema_error("cannot open output file '" + path + "'");
    out << data;
    if (!out) throw schema_error("failed writing '" + path + "'");
}

inline json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw schema_error(what + ": invalid JSON (" + e.what() + ")");
    }
}

template <class T>
T get(const json& j, const char* key, const std::string& what) {
    if (!j.is_object() || !j.contains(key)) throw schema_error(what + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw schema_error(what + ": bad field '" + key + "' (" + e.what() + ")");
    }
}

// ---------------------------------------------------------------- configurations

/// Text format: one line of 0/1, site 1 first. Trailing newline (LF or CRLF)
/// is ignored on input and written as LF.
inline BallConfig config_from_text(const std::string& text) { return BallConfig::from_string(text); }
inline std::string config_to_text(const BallConfig& c) { return c.to_string() + "\n"; }

// ---------------------------------------------------------------- piecewise-linear

inline json to_json(const PiecewiseLinear& f) {
    json bp = json::array();
    for (std::size_t k = 0; k < f.size(); ++k) bp.push_back({f.knots()[k], f.values()[k]});
    return {{"breakpoints", bp}, {"tail_slope", f.tail_slope()}};
}

inline PiecewiseLinear plf_from_json(const json& j) {
    const std::string what = "piecewise-linear";
    auto bp = get<std::vector<std::vector<double>>>(j, "breakpoints", what);
    std::vector<double> u, f;
    for (const auto& p : bp) {
        if (p.size() != 2) throw schema_error(what + ": each breakpoint must be [u, f]");
        u.push_back(p[0]);
        f.push_back(p[1]);
    }
    return PiecewiseLinear(std::move(u), std::move(f), get<double>(j, "tail_slope", what));
}

inline json to_json(const IntegratedProfile& p) {
    json arr = json::array();
    for (const auto& f : p.psi) arr.push_back(to_json(f));
    return {{"frame", p.frame == Frame::spatial ? "spatial" : "effective"}, {"psi", arr}};
}

inline IntegratedProfile profile_from_json(const json& j) {
    const std::string what = "integrated profile";
    IntegratedProfile p;
    const auto frame = j.is_object() && j.contains("frame") ? get<std::string>(j, "frame", what) : std::string("spatial");
    if (frame == "spatial") p.frame = Frame::spatial;
    else if (frame == "effective") p.frame = Frame::effective;
    else throw schema_error(what + ": frame must be 'spatial' or 'effective'");
    if (!j.contains("psi") || !j.at("psi").is_array() || j.at("psi").empty()) throw schema_error(what + ": 'psi' must be a non-empty array");
    for (const auto& f : j.at("psi")) p.psi.push_back(plf_from_json(f));
    return p;
}

// ---------------------------------------------------------------- slots

/// {"max_size": I, "rows": [[[m, count], ...], ...]} with row k for size k+1;
/// only non-zero entries are listed.
inline json to_json(const SlotDecomposition& z) {
    json rows = json::array();
    for (int i = 1; i <= z.max_size(); ++i) {
        json row = json::array();
        const auto r = z.row(i);
        for (std::size_t m = 0; m < r.size(); ++m)
            if (r[m] != 0) row.push_back({static_cast<std::int64_t>(m + 1), r[m]});
        rows.push_back(row);
    }
    return {{"max_size", z.max_size()}, {"rows", rows}};
}

inline SlotDecomposition slots_from_json(const json& j) {
    const std::string what = "slot decomposition";
    const auto rows = get<std::vector<std::vector<std::vector<std::int64_t>>>>(j, "rows", what);
    SlotDecomposition z(j.contains("max_size") ? get<int>(j, "max_size", what) : static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (const auto& e : rows[i]) {
            if (e.size() != 2) throw schema_error(what + ": each entry must be [slot, count]");
            if (e[0] < 1 || e[1] < 0) throw schema_error(what + ": slots start at 1 and counts are non-negative");
            z.add(static_cast<int>(i + 1), e[0], e[1]);
        }
    return z;
}

// ---------------------------------------------------------------- densities

inline json to_json(const Bump& b) { return {{"a", b.a}, {"b", b.b}, {"c", b.c}, {"q", b.q}}; }

/// Either {"h", "length", "components": [[bump, ...], ...]} with closed-form
/// bumps, or {"h", "values": [[rho_1 at nodes], ...]}.
inline DensityGrid density_from_json(const json& j) {
    const std::string what = "density profile";
    const double h = get<double>(j, "h", what);
    if (j.contains("components")) {
        SmoothProfile p;
        for (const auto& comp : j.at("components")) {
            std::vector<Bump> bumps;
            for (const auto& b : comp) {
                Bump x{get<double>(b, "a", what), get<double>(b, "b", what), get<double>(b, "c", what), 1};
                if (b.contains("q")) x.q = get<int>(b, "q", what);
                bumps.push_back(x);
            }
            p.components.push_back(std::move(bumps));
        }
        if (p.components.empty()) throw schema_error(what + ": no components");
        return DensityGrid::sample(p, h, get<double>(j, "length", what));
    }
    DensityGrid g;
    g.h = h;
    g.values = get<std::vector<std::vector<double>>>(j, "values", what);
    g.validate();
    return g;
}

inline json to_json(const DensityGrid& g) {
    json j{{"h", g.h}, {"values", g.values}};
    if (g.generator) {
        json comps = json::array();
        for (const auto& c : g.generator->components) {
            json arr = json::array();
            for (const auto& b : c) arr.push_back(to_json(b));
            comps.push_back(arr);
        }
        j["components"] = comps;
        j["length"] = g.length();
    }
    return j;
}

// ---------------------------------------------------------------- slot rates

/// {"rates": [[{"z_begin", "z_end", "rate"}, ...], ...]} with row k for size k+1.
inline SlotRateSpec rates_from_json(const json& j) {
    const std::string what = "slot rates";
    SlotRateSpec s;
    if (!j.contains("rates") || !j.at("rates").is_array()) throw schema_error(what + ": missing array 'rates'");
    for (const auto& row : j.at("rates")) {
        std::vector<RateInterval> r;
        for (const auto& e : row) r.push_back({get<double>(e, "z_begin", what), get<double>(e, "z_end", what), get<double>(e, "rate", what)});
        s.rates.push_back(std::move(r));
    }
    return s;
}

// ---------------------------------------------------------------- CSV

/// CSV with '#' comment lines carrying the manifest; numbers at 17
/// significant digits; LF line ends.
class Csv {
public:
    void comment(const std::string& line) { out_ << "# " << line << '\n'; }

    void header(const std::vector<std::string>& cols) {
        for (std::size_t k = 0; k < cols.size(); ++k) out_ << (k ? "," : "") << cols[k];
        out_ << '\n';
    }

    template <class... T>
    void row(const T&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << '\n';
    }

    void row(const std::vector<double>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << fmt(cells[k]);
        out_ << '\n';
    }

    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;

    static std::string cell(double v) { return fmt(v); }
    static std::string cell(float v) { return fmt(v); }
    template <class T>
        requires std::is_integral_v<T>
    static std::string cell(T v) { return std::to_string(v); }
    static std::string cell(const std::string& s) { return s; }
};

} // namespace bbs::io

// util.hpp — numeric helpers, deterministic formatting, seed derivation.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace cogrec {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ── Deterministic number formatting ──────────────────────────────────
// All text output (CSV, manifests) goes through these so repeated runs
// produce byte-identical files. std::to_chars emits the shortest string
// that round-trips exactly.

inline std::string format_double(double v) {
    if (std::isnan(v)) return "NaN";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
    if (s == "NaN" || s == "nan") {
        out = kNaN;
        return true;
    }
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc{} && res.ptr == last;
}

inline bool parse_long(std::string_view s, long& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc{} && res.ptr == last;
}

// ── Seed derivation ──────────────────────────────────────────────────
// One top-level seed fans out to every stochastic component through a
// fixed counter scheme: derive_seed(master, stream, index). Streams are
// small integers documented at each call site; the same (stream, index)
// always yields the same child seed.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index = 0) {
    return splitmix64(splitmix64(master ^ (stream * 0xD6E8FEB86659FD93ull)) + index);
}

// ── Basic statistics ─────────────────────────────────────────────────
// Population moments over a span; NaN inputs are the caller's problem
// (feature code filters them first).

inline double mean_of(std::span<const double> v) {
    if (v.empty()) return kNaN;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double population_std(std::span<const double> v) {
    if (v.empty()) return kNaN;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

/// Excess kurtosis (m4/m2^2 - 3). NaN when the variance is zero.
inline double excess_kurtosis(std::span<const double> v) {
    if (v.size() < 2) return kNaN;
    const double m = mean_of(v);
    double m2 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d = x - m;
        const double d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    const double n = static_cast<double>(v.size());
    m2 /= n;
    m4 /= n;
    if (m2 <= 0.0) return kNaN;
    return m4 / (m2 * m2) - 3.0;
}

// ── String helpers ───────────────────────────────────────────────────

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace cogrec

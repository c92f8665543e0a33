// dsp.hpp — small filtering toolbox used by the preprocessing stage.
//
// Nothing here is adaptive or stateful across calls: a filter is designed
// from (cutoff, sample rate), applied forward-backward for zero phase, and
// thrown away. Determinism and testability over generality.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace cogrec::dsp {

/// Second-order IIR section, direct form I. a0 is normalized to 1.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

/// 2nd-order Butterworth low-pass via bilinear transform.
inline Biquad butterworth_lowpass(double cutoff_hz, double sample_rate_hz) {
    const double k = std::tan(std::numbers::pi * cutoff_hz / sample_rate_hz);
    const double q = 1.0 / std::numbers::sqrt2;
    const double norm = 1.0 / (1.0 + k / q + k * k);
    Biquad f;
    f.b0 = k * k * norm;
    f.b1 = 2.0 * f.b0;
    f.b2 = f.b0;
    f.a1 = 2.0 * (k * k - 1.0) * norm;
    f.a2 = (1.0 - k / q + k * k) * norm;
    return f;
}

/// 2nd-order Butterworth high-pass via bilinear transform.
inline Biquad butterworth_highpass(double cutoff_hz, double sample_rate_hz) {
    const double k = std::tan(std::numbers::pi * cutoff_hz / sample_rate_hz);
    const double q = 1.0 / std::numbers::sqrt2;
    const double norm = 1.0 / (1.0 + k / q + k * k);
    Biquad f;
    f.b0 = norm;
    f.b1 = -2.0 * norm;
    f.b2 = norm;
    f.a1 = 2.0 * (k * k - 1.0) * norm;
    f.a2 = (1.0 - k / q + k * k) * norm;
    return f;
}

inline void filter_in_place(const Biquad& f, std::vector<double>& x) {
    double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
    for (double& v : x) {
        const double x0 = v;
        const double y0 = f.b0 * x0 + f.b1 * x1 + f.b2 * x2 - f.a1 * y1 - f.a2 * y2;
        x2 = x1;
        x1 = x0;
        y2 = y1;
        y1 = y0;
        v = y0;
    }
}

/// Zero-phase filtering: odd-reflection padding at both ends, forward pass,
/// backward pass, unpad. Pad length is capped at n-1.
inline std::vector<double> filtfilt(const Biquad& f, std::span<const double> x,
                                    std::size_t pad_len) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    const std::size_t pad = std::min(pad_len, n - 1);

    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 2; i <= pad + 1; ++i) ext.push_back(2.0 * x[n - 1] - x[n - i]);

    filter_in_place(f, ext);
    std::reverse(ext.begin(), ext.end());
    filter_in_place(f, ext);
    std::reverse(ext.begin(), ext.end());

    return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                               ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

/// Centered moving average with an odd window. Shrinks at the edges.
inline std::vector<double> moving_average(std::span<const double> x, std::size_t half_width) {
    const std::size_t n = x.size();
    std::vector<double> out(n);
    if (n == 0) return out;
    // prefix sums keep this O(n)
    std::vector<double> ps(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) ps[i + 1] = ps[i] + x[i];
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half_width ? i - half_width : 0;
        const std::size_t hi = std::min(n - 1, i + half_width);
        out[i] = (ps[hi + 1] - ps[lo]) / static_cast<double>(hi - lo + 1);
    }
    return out;
}

/// Strict local maxima thinned to a minimum spacing. Candidates are taken
/// in descending amplitude (ties: earlier sample wins) and any candidate
/// closer than min_distance samples to an accepted one is discarded.
inline std::vector<std::size_t> local_maxima_min_distance(std::span<const double> x,
                                                          std::size_t min_distance) {
    const std::size_t n = x.size();
    std::vector<std::size_t> cand;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (x[i] <= x[i - 1]) continue;
        std::size_t j = i;  // flat top: first sample represents the plateau
        while (j + 1 < n && x[j + 1] == x[i]) ++j;
        if (j + 1 < n && x[j + 1] < x[i]) cand.push_back(i);
        i = j;
    }
    std::vector<std::size_t> order(cand.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (x[cand[a]] != x[cand[b]]) return x[cand[a]] > x[cand[b]];
        return cand[a] < cand[b];
    });
    std::vector<char> banned(cand.size(), 0);
    std::vector<std::size_t> accepted;
    for (std::size_t oi : order) {
        if (banned[oi]) continue;
        accepted.push_back(cand[oi]);
        const std::size_t lo = cand[oi] >= min_distance ? cand[oi] - min_distance + 1 : 0;
        const std::size_t hi = cand[oi] + min_distance - 1;
        auto first = std::lower_bound(cand.begin(), cand.end(), lo);
        auto last = std::upper_bound(cand.begin(), cand.end(), hi);
        for (auto it = first; it != last; ++it)
            banned[static_cast<std::size_t>(it - cand.begin())] = 1;
    }
    std::sort(accepted.begin(), accepted.end());
    return accepted;
}

}  // namespace cogrec::dsp

// preprocess.hpp — raw channels to derived series.
//
// detect_r_peaks   ECG -> R-peak times and inter-beat intervals
// detect_resp_peaks RESP -> breath peak times
// decompose_gsr    GSR -> tonic + phasic components
// clean_gaze       gaze samples -> kept samples, blinks, offscreen runs
//
// All operations are pure functions of their inputs.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "cogrec/dsp.hpp"
#include "cogrec/errors.hpp"
#include "cogrec/types.hpp"
#include "cogrec/util.hpp"

namespace cogrec {

// ── IBI series ───────────────────────────────────────────────────────

/// R-peak times plus the interval sequence between consecutive peaks.
/// intervals[i] spans (peak_times[i], peak_times[i+1]) in milliseconds;
/// intervals rejected by the artifact rule are NaN, keeping the
/// one-less-than-peaks length relation intact while excluding them from
/// every downstream statistic.
struct IBISeries {
    std::vector<double> peak_times;  // seconds, strictly increasing
    std::vector<double> intervals;   // ms, NaN where rejected

    /// Midpoint of interval i, used for windowing and interpolation.
    double interval_mid(std::size_t i) const {
        return 0.5 * (peak_times[i] + peak_times[i + 1]);
    }
};

inline constexpr double kIbiMinMs = 250.0;
inline constexpr double kIbiMaxMs = 3000.0;
inline constexpr double kIbiRelativeTol = 0.4;  // vs. median of neighbours

/// Artifact mask over raw intervals (ms): an interval survives if it is
/// inside the physiological bounds and within 40% of the median of up to
/// four in-bounds neighbours on each side. The relative rule catches
/// missed-beat doublets that the bounds alone cannot (a 2000 ms gap in a
/// 1000 ms rhythm is in-bounds but not a beat-to-beat interval).
inline std::vector<char> ibi_artifact_mask(const std::vector<double>& ms) {
    const std::size_t n = ms.size();
    std::vector<char> in_bounds(n), keep(n);
    for (std::size_t i = 0; i < n; ++i)
        in_bounds[i] = ms[i] >= kIbiMinMs && ms[i] <= kIbiMaxMs;
    for (std::size_t i = 0; i < n; ++i) {
        keep[i] = in_bounds[i];
        if (!keep[i]) continue;
        std::vector<double> nb;
        for (std::size_t j = i; j-- > 0 && nb.size() < 4;)
            if (in_bounds[j]) nb.push_back(ms[j]);
        std::size_t added_left = nb.size();
        for (std::size_t j = i + 1; j < n && nb.size() < added_left + 4; ++j)
            if (in_bounds[j]) nb.push_back(ms[j]);
        if (nb.size() < 2) continue;
        std::sort(nb.begin(), nb.end());
        const double med = nb.size() % 2 == 1
                               ? nb[nb.size() / 2]
                               : 0.5 * (nb[nb.size() / 2 - 1] + nb[nb.size() / 2]);
        if (std::abs(ms[i] - med) > kIbiRelativeTol * med) keep[i] = 0;
    }
    return keep;
}

/// Pan-Tompkins-style QRS detection: 5-15 Hz band-pass, squared
/// derivative, 150 ms moving-window integration, adaptive two-level
/// threshold with search-back, peak refinement on the raw signal.
inline IBISeries detect_r_peaks(const Channel& ecg) {
    const double fs = ecg.sample_rate;
    const std::size_t n = ecg.samples.size();
    if (fs < 100.0) throw TooShort("ECG sample rate must be >= 100 Hz");
    if (static_cast<double>(n) / fs < 10.0)
        throw TooShort("ECG must be at least 10 s long");

    {
        const double m = mean_of(ecg.samples);
        double var = 0.0;
        for (double v : ecg.samples) var += (v - m) * (v - m);
        if (var == 0.0) throw FlatSignal("ECG has zero variance");
    }

    // band-pass, zero phase
    const auto pad = static_cast<std::size_t>(fs);  // 1 s
    auto band = dsp::filtfilt(dsp::butterworth_highpass(5.0, fs), ecg.samples, pad);
    band = dsp::filtfilt(dsp::butterworth_lowpass(15.0, fs), band, pad);

    // squared derivative + moving-window integration
    std::vector<double> mwi(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double d = (band[i + 1] - band[i - 1]) * fs * 0.5;
        mwi[i] = d * d;
    }
    mwi = dsp::moving_average(mwi, static_cast<std::size_t>(0.075 * fs));

    // candidate peaks with a 200 ms refractory
    const auto refractory = static_cast<std::size_t>(0.2 * fs);
    const auto cands = dsp::local_maxima_min_distance(mwi, std::max<std::size_t>(1, refractory));

    // adaptive threshold per Pan-Tompkins, seeded from the first 2 s
    const auto init_n = std::min(n, static_cast<std::size_t>(2.0 * fs));
    double spki = 0.0, npki = 0.0;
    for (std::size_t i = 0; i < init_n; ++i) spki = std::max(spki, mwi[i]);
    spki *= 0.6;
    npki = 0.5 * mean_of(std::span(mwi.data(), init_n));

    std::vector<std::size_t> beats;
    std::vector<double> recent_rr;
    auto avg_rr = [&]() {
        if (recent_rr.empty()) return 0.0;
        double s = 0.0;
        for (double r : recent_rr) s += r;
        return s / static_cast<double>(recent_rr.size());
    };
    auto note_beat = [&](std::size_t idx) {
        if (!beats.empty()) {
            recent_rr.push_back(static_cast<double>(idx - beats.back()) / fs);
            if (recent_rr.size() > 8) recent_rr.erase(recent_rr.begin());
        }
        beats.push_back(idx);
    };

    std::size_t last_considered = 0;
    for (std::size_t ci = 0; ci < cands.size(); ++ci) {
        const std::size_t c = cands[ci];
        const double thr = npki + 0.25 * (spki - npki);
        if (mwi[c] > thr) {
            // search-back: a long gap since the previous beat may hide a
            // weaker complex among the skipped candidates
            const double rr = avg_rr();
            if (!beats.empty() && rr > 0.0 &&
                static_cast<double>(c - beats.back()) / fs > 1.66 * rr) {
                std::size_t best = 0;
                bool found = false;
                for (std::size_t bi = last_considered; bi < ci; ++bi) {
                    const std::size_t b = cands[bi];
                    if (b <= beats.back() + refractory) continue;
                    if (mwi[b] > 0.5 * thr && (!found || mwi[b] > mwi[best])) {
                        best = b;
                        found = true;
                    }
                }
                if (found && best + refractory < c) {
                    note_beat(best);
                    spki = 0.25 * mwi[best] + 0.75 * spki;
                }
            }
            note_beat(c);
            spki = 0.125 * mwi[c] + 0.875 * spki;
            last_considered = ci + 1;
        } else {
            npki = 0.125 * mwi[c] + 0.875 * npki;
        }
    }

    // refine each beat to the raw-signal maximum nearby
    const auto half = static_cast<std::size_t>(0.10 * fs);
    std::vector<std::size_t> refined;
    for (std::size_t b : beats) {
        const std::size_t lo = b >= half ? b - half : 0;
        const std::size_t hi = std::min(n - 1, b + half);
        std::size_t best = lo;
        for (std::size_t i = lo + 1; i <= hi; ++i)
            if (ecg.samples[i] > ecg.samples[best]) best = i;
        refined.push_back(best);
    }
    std::sort(refined.begin(), refined.end());
    refined.erase(std::unique(refined.begin(), refined.end()), refined.end());

    // enforce a physiological minimum spacing, preferring taller raw peaks
    std::vector<std::size_t> final_peaks;
    for (std::size_t idx : refined) {
        if (!final_peaks.empty() &&
            static_cast<double>(idx - final_peaks.back()) / fs < kIbiMinMs / 1000.0) {
            if (ecg.samples[idx] > ecg.samples[final_peaks.back()])
                final_peaks.back() = idx;
        } else {
            final_peaks.push_back(idx);
        }
    }

    IBISeries out;
    out.peak_times.reserve(final_peaks.size());
    for (std::size_t idx : final_peaks) out.peak_times.push_back(ecg.time_at(idx));
    if (out.peak_times.size() >= 2) {
        std::vector<double> ms(out.peak_times.size() - 1);
        for (std::size_t i = 0; i + 1 < out.peak_times.size(); ++i)
            ms[i] = (out.peak_times[i + 1] - out.peak_times[i]) * 1000.0;
        const auto keep = ibi_artifact_mask(ms);
        out.intervals.resize(ms.size());
        for (std::size_t i = 0; i < ms.size(); ++i)
            out.intervals[i] = keep[i] ? ms[i] : kNaN;
    }
    return out;
}

// ── Respiration peaks ────────────────────────────────────────────────

/// Breath peaks: 0.6 s moving-average smoothing, strict local maxima,
/// 1.5 s minimum spacing, amplitude gate above the smoothed mean.
inline std::vector<double> detect_resp_peaks(const Channel& resp) {
    const double fs = resp.sample_rate;
    const std::size_t n = resp.samples.size();
    if (static_cast<double>(n) / fs < 15.0)
        throw TooShort("respiration must be at least 15 s long");

    const auto smooth = dsp::moving_average(
        resp.samples, std::max<std::size_t>(1, static_cast<std::size_t>(0.3 * fs)));
    const double m = mean_of(smooth);
    const double sd = population_std(smooth);
    if (sd == 0.0) return {};

    const auto min_dist = std::max<std::size_t>(1, static_cast<std::size_t>(1.5 * fs));
    const auto idx = dsp::local_maxima_min_distance(smooth, min_dist);
    std::vector<double> out;
    for (std::size_t i : idx)
        if (smooth[i] >= m + 0.1 * sd) out.push_back(resp.time_at(i));
    return out;
}

// ── GSR decomposition ────────────────────────────────────────────────

/// Tonic/phasic split of skin conductance. tonic + phasic reconstructs
/// the input exactly by construction.
struct GSRComponents {
    std::vector<double> tonic;
    std::vector<double> phasic;
};

/// Tonic = 0.05 Hz zero-phase order-4 Butterworth low-pass (applied to
/// the mean-removed signal so constants pass through untouched);
/// phasic = residual.
inline GSRComponents decompose_gsr(const Channel& gsr) {
    const double fs = gsr.sample_rate;
    const std::size_t n = gsr.samples.size();
    if (static_cast<double>(n) / fs < 15.0)
        throw TooShort("GSR must be at least 15 s long");

    const double m = mean_of(gsr.samples);
    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = gsr.samples[i] - m;

    const auto pad = std::min<std::size_t>(n - 1, static_cast<std::size_t>(fs / 0.05));
    auto low = dsp::filtfilt(dsp::butterworth_lowpass(0.05, fs), centered, pad);

    GSRComponents out;
    out.tonic.resize(n);
    out.phasic.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.tonic[i] = m + low[i];
        out.phasic[i] = gsr.samples[i] - out.tonic[i];
    }
    return out;
}

// ── Gaze cleaning ────────────────────────────────────────────────────

struct TimeInterval {
    double start = 0.0;
    double end = 0.0;
    double duration() const { return end - start; }
};

/// Gaze track after cleaning: on-screen samples, blink intervals and
/// offscreen intervals. Every input sample belongs to exactly one of
/// {kept, blink, offscreen, discarded-short-gap}.
struct GazeTrack {
    std::vector<GazeSample> samples;       // kept, all on-screen and valid
    std::vector<TimeInterval> blinks;
    std::vector<TimeInterval> offscreen;
};

inline constexpr double kBlinkMinS = 0.070;
inline constexpr double kBlinkMaxS = 0.500;

/// Invalid-sample runs of blink-length become blinks; longer invalid runs
/// and any run containing an out-of-bounds sample become offscreen
/// intervals; very short invalid runs are discarded.
inline GazeTrack clean_gaze(const std::vector<GazeSample>& gaze, ScreenSize screen) {
    GazeTrack out;
    if (gaze.empty()) return out;

    // nominal sample spacing, for the trailing edge of a run
    double dt_nom = 1.0 / 60.0;
    if (gaze.size() >= 2) {
        std::vector<double> diffs;
        diffs.reserve(gaze.size() - 1);
        for (std::size_t i = 1; i < gaze.size(); ++i) diffs.push_back(gaze[i].t - gaze[i - 1].t);
        std::nth_element(diffs.begin(), diffs.begin() + static_cast<std::ptrdiff_t>(diffs.size() / 2),
                         diffs.end());
        dt_nom = diffs[diffs.size() / 2];
    }

    auto on_screen = [&](const GazeSample& g) {
        return g.valid && g.x >= 0.0 && g.x < static_cast<double>(screen.width_px) &&
               g.y >= 0.0 && g.y < static_cast<double>(screen.height_px);
    };

    std::size_t i = 0;
    const std::size_t n = gaze.size();
    while (i < n) {
        if (on_screen(gaze[i])) {
            out.samples.push_back(gaze[i]);
            ++i;
            continue;
        }
        std::size_t j = i;
        bool any_out_of_bounds = false;
        while (j < n && !on_screen(gaze[j])) {
            if (gaze[j].valid) any_out_of_bounds = true;
            ++j;
        }
        const TimeInterval run{gaze[i].t, gaze[j - 1].t + dt_nom};
        const double d = run.duration();
        if (any_out_of_bounds) {
            out.offscreen.push_back(run);
        } else if (d >= kBlinkMinS - 1e-9 && d <= kBlinkMaxS + 1e-9) {
            out.blinks.push_back(run);
        } else if (d > kBlinkMaxS) {
            out.offscreen.push_back(run);
        }
        // shorter runs: tracker flicker, dropped silently
        i = j;
    }
    return out;
}

}  // namespace cogrec

// features.hpp — sliding-window feature extraction and normalization.
//
// A 15 s window advances in 1 s steps over each session; a window exists
// iff its integer-second centre falls inside a labeled interval and the
// full 15 s fits inside the recorded span. Each window yields the named
// features of the selected signal set in a fixed canonical order.
// Undefined features are NaN; the classifier handles NaN via learned
// default split directions.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cogrec/preprocess.hpp"
#include "cogrec/types.hpp"
#include "cogrec/util.hpp"

namespace cogrec {

// ── Windows ──────────────────────────────────────────────────────────

inline constexpr double kWindowHalfWidth = 7.5;  // seconds
inline constexpr double kWindowWidth = 15.0;

struct Window {
    double center = 0.0;
    ActivityLabel label = ActivityLabel::Pause;

    double start() const { return center - kWindowHalfWidth; }
    double end() const { return center + kWindowHalfWidth; }
};

namespace window_detail {

/// Largest integer strictly less than x.
inline long long last_int_below(double x) {
    const double c = std::ceil(x);
    return static_cast<long long>(c == x ? c - 1.0 : std::floor(x));
}

/// Inclusive integer-centre range for one label interval, or an empty
/// range (lo > hi).
inline std::pair<long long, long long> centre_range(const LabelInterval& iv, double span_start,
                                                    double span_end) {
    const long long lo =
        static_cast<long long>(std::ceil(std::max(iv.start, span_start + kWindowHalfWidth)));
    const long long hi =
        std::min(last_int_below(iv.end),
                 static_cast<long long>(std::floor(span_end - kWindowHalfWidth)));
    return {lo, hi};
}

}  // namespace window_detail

/// Closed-form window count for a label track within a recorded span.
inline long long count_windows(const LabelTrack& track, double span_start, double span_end) {
    long long total = 0;
    for (const auto& iv : track.intervals) {
        const auto [lo, hi] = window_detail::centre_range(iv, span_start, span_end);
        if (hi >= lo) total += hi - lo + 1;
    }
    return total;
}

inline std::vector<Window> slide_windows(const RecordingSession& session) {
    std::vector<Window> out;
    if (session.labels.empty()) return out;
    const double span_start = session.recorded_start();
    const double span_end = session.recorded_end();
    for (const auto& iv : session.labels.intervals) {
        const auto [lo, hi] = window_detail::centre_range(iv, span_start, span_end);
        for (long long c = lo; c <= hi; ++c)
            out.push_back(Window{static_cast<double>(c), iv.label});
    }
    return out;
}

// ── Signal sets and the canonical feature order ──────────────────────

enum class SignalSet : int { Sig1 = 0, Sig2 = 1, Sig3 = 2 };

inline constexpr std::array<std::string_view, 3> kSignalSetNames = {"SIG-1", "SIG-2", "SIG-3"};

inline std::string_view signal_set_name(SignalSet s) {
    return kSignalSetNames[static_cast<std::size_t>(s)];
}

inline std::optional<SignalSet> signal_set_from_name(std::string_view name) {
    for (int i = 0; i < 3; ++i)
        if (kSignalSetNames[static_cast<std::size_t>(i)] == name)
            return static_cast<SignalSet>(i);
    return std::nullopt;
}

inline constexpr std::size_t kNumEcgFeatures = 10;
inline constexpr std::size_t kNumRespFeatures = 3;
inline constexpr std::size_t kNumGsrFeatures = 11;
inline constexpr std::size_t kNumGazeFeatures = 11;

inline constexpr std::array<std::string_view, 35> kCanonicalFeatureNames = {
    // ECG
    "AVG_HR_15s", "AVG_HR_5s", "AVG_HR_RATIO", "AVG_HR_DIFF", "SDNN", "RMSSD", "LF_POWER",
    "HF_POWER", "LF_HF_RATIO", "TOTAL_POWER",
    // RESP
    "RESP_AMP", "RESP_DOM_FREQ", "RESP_PEAKS",
    // GSR, tonic then phasic, then raw peaks
    "AVG_GSR_15s_TONIC", "AVG_GSR_5s_TONIC", "AVG_GSR_RATIO_TONIC", "AVG_MEAN_GSR_DIFF_TONIC",
    "STD_GSR_TONIC", "AVG_GSR_15s_PHASIC", "AVG_GSR_5s_PHASIC", "AVG_GSR_RATIO_PHASIC",
    "AVG_MEAN_GSR_DIFF_PHASIC", "STD_GSR_PHASIC", "GSR_PEAKS",
    // Eye tracking
    "BLINKS", "GAZE_OUTSIDE", "AVG_POSITION_X", "AVG_POSITION_Y", "STD_POSITION_X",
    "STD_POSITION_Y", "KURT_POSITION_X", "KURT_POSITION_Y", "AVG_VELOCITY", "STD_VELOCITY",
    "KURT_VELOCITY"};

inline std::size_t feature_count(SignalSet s) {
    switch (s) {
        case SignalSet::Sig1: return kNumEcgFeatures + kNumRespFeatures;
        case SignalSet::Sig2: return kNumEcgFeatures + kNumRespFeatures + kNumGsrFeatures;
        case SignalSet::Sig3: return kCanonicalFeatureNames.size();
    }
    return 0;
}

inline std::span<const std::string_view> feature_names(SignalSet s) {
    return {kCanonicalFeatureNames.data(), feature_count(s)};
}

// ── Feature vectors ──────────────────────────────────────────────────

struct FeatureVector {
    std::string player_id;
    Window window;
    SignalSet signal_set = SignalSet::Sig3;
    std::vector<double> values;  // canonical order, NaN where undefined
};

// ── Spectral helpers (cached twiddle tables) ─────────────────────────

namespace feat_detail {

/// Power of chosen DFT bins of a fixed-length real signal, mean removed,
/// one-sided periodogram scaling. Tables are built once per length.
class BinPowerTable {
public:
    BinPowerTable() = default;
    BinPowerTable(std::size_t n, std::size_t k_lo, std::size_t k_hi)
        : n_(n), k_lo_(k_lo), k_hi_(k_hi) {
        const std::size_t n_bins = k_hi - k_lo + 1;
        cos_.resize(n_bins * n);
        sin_.resize(n_bins * n);
        for (std::size_t k = k_lo; k <= k_hi; ++k) {
            const double w = 2.0 * std::numbers::pi * static_cast<double>(k) /
                             static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) {
                cos_[(k - k_lo) * n + i] = std::cos(w * static_cast<double>(i));
                sin_[(k - k_lo) * n + i] = std::sin(w * static_cast<double>(i));
            }
        }
    }

    /// powers[k - k_lo] for each table bin.
    std::vector<double> powers(std::span<const double> x) const {
        std::vector<double> out(k_hi_ - k_lo_ + 1, 0.0);
        double m = 0.0;
        for (double v : x) m += v;
        m /= static_cast<double>(x.size());
        const double nn = static_cast<double>(n_);
        for (std::size_t k = k_lo_; k <= k_hi_; ++k) {
            const double* ct = &cos_[(k - k_lo_) * n_];
            const double* st = &sin_[(k - k_lo_) * n_];
            double re = 0.0, im = 0.0;
            for (std::size_t i = 0; i < n_; ++i) {
                const double v = x[i] - m;
                re += v * ct[i];
                im -= v * st[i];
            }
            const double scale = (k == 0 || 2 * k == n_) ? 1.0 : 2.0;
            out[k - k_lo_] = scale * (re * re + im * im) / (nn * nn);
        }
        return out;
    }

    std::size_t length() const { return n_; }
    std::size_t k_lo() const { return k_lo_; }

private:
    std::size_t n_ = 0, k_lo_ = 0, k_hi_ = 0;
    std::vector<double> cos_, sin_;
};

inline double safe_ratio(double num, double den) {
    if (den == 0.0) return num == 0.0 ? 0.0 : kNaN;
    return num / den;
}

/// Peak prominence within a slice: height above the higher of the two
/// valley floors reached before a taller sample on each side.
inline double prominence(std::span<const double> x, std::size_t peak) {
    const double v = x[peak];
    double lmin = v, rmin = v;
    for (std::size_t i = peak; i-- > 0;) {
        if (x[i] > v) break;
        lmin = std::min(lmin, x[i]);
    }
    for (std::size_t i = peak + 1; i < x.size(); ++i) {
        if (x[i] > v) break;
        rmin = std::min(rmin, x[i]);
    }
    return v - std::max(lmin, rmin);
}

}  // namespace feat_detail

/// Spectral tables for the respiration dominant-frequency search, keyed
/// by window slice length.
struct RespSpectrumCache {
    std::map<std::size_t, feat_detail::BinPowerTable> tables;
};

// ── Per-window feature blocks ────────────────────────────────────────

/// HRV block. `mids` must hold interval_mid(i) for every interval of
/// `ibi` (ascending). All ten values are NaN when the window holds fewer
/// than 5 valid intervals.
inline std::array<double, kNumEcgFeatures> compute_ecg_features(const IBISeries& ibi,
                                                                std::span<const double> mids,
                                                                const Window& w) {
    std::array<double, kNumEcgFeatures> out;
    out.fill(kNaN);
    const double ws = w.start(), we = w.end(), c = w.center;

    std::vector<double> vals, in_mids;
    std::vector<std::size_t> idxs;
    const auto lo = std::lower_bound(mids.begin(), mids.end(), ws);
    for (auto it = lo; it != mids.end() && *it < we; ++it) {
        const auto i = static_cast<std::size_t>(it - mids.begin());
        if (!std::isnan(ibi.intervals[i])) {
            vals.push_back(ibi.intervals[i]);
            in_mids.push_back(*it);
            idxs.push_back(i);
        }
    }
    if (vals.size() < 5) return out;

    auto hr_over = [&](double a, double b) {
        double s = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < in_mids.size(); ++i)
            if (in_mids[i] >= a && in_mids[i] < b) {
                s += vals[i];
                ++n;
            }
        if (n == 0) return kNaN;
        return 60000.0 / (s / static_cast<double>(n));
    };

    out[0] = hr_over(ws, we);               // AVG_HR_15s
    out[1] = hr_over(c - 2.5, c + 2.5);     // AVG_HR_5s
    out[2] = out[1] / out[0];               // AVG_HR_RATIO
    out[3] = hr_over(c, we) - hr_over(ws, c);  // AVG_HR_DIFF, right minus left
    out[4] = population_std(vals);          // SDNN

    {
        double ss = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i + 1 < idxs.size(); ++i) {
            if (idxs[i + 1] == idxs[i] + 1) {  // adjacent beats, no artifact between
                const double d = vals[i + 1] - vals[i];
                ss += d * d;
                ++n;
            }
        }
        out[5] = n > 0 ? std::sqrt(ss / static_cast<double>(n)) : kNaN;  // RMSSD
    }

    // 4 Hz resampled tachogram across the window -> 60-point DFT;
    // bins 1..6 are 1/15 .. 6/15 Hz
    constexpr std::size_t kNResample = 60;
    static const feat_detail::BinPowerTable table(kNResample, 1, 6);
    std::array<double, kNResample> tacho{};
    for (std::size_t k = 0; k < kNResample; ++k) {
        const double t = ws + static_cast<double>(k) * 0.25;
        if (t <= in_mids.front()) {
            tacho[k] = vals.front();
        } else if (t >= in_mids.back()) {
            tacho[k] = vals.back();
        } else {
            const auto it = std::upper_bound(in_mids.begin(), in_mids.end(), t);
            const auto j = static_cast<std::size_t>(it - in_mids.begin());
            const double f = (t - in_mids[j - 1]) / (in_mids[j] - in_mids[j - 1]);
            tacho[k] = vals[j - 1] + f * (vals[j] - vals[j - 1]);
        }
    }
    const auto p = table.powers(std::span(tacho.data(), tacho.size()));
    const double lf_abs = p[0] + p[1];                  // 0.067, 0.133 Hz
    const double hf_abs = p[2] + p[3] + p[4] + p[5];    // 0.2 .. 0.4 Hz
    const double total = lf_abs + hf_abs;
    out[6] = total > 0.0 ? lf_abs / total : kNaN;  // LF_POWER (relative)
    out[7] = total > 0.0 ? hf_abs / total : kNaN;  // HF_POWER (relative)
    out[8] = hf_abs > 0.0 ? lf_abs / hf_abs : kNaN;  // LF_HF_RATIO
    out[9] = total;                                  // TOTAL_POWER
    return out;
}

inline std::array<double, kNumEcgFeatures> compute_ecg_features(const IBISeries& ibi,
                                                                const Window& w) {
    std::vector<double> mids;
    mids.reserve(ibi.intervals.size());
    for (std::size_t i = 0; i < ibi.intervals.size(); ++i) mids.push_back(ibi.interval_mid(i));
    return compute_ecg_features(ibi, mids, w);
}

/// RESP_AMP, RESP_DOM_FREQ, RESP_PEAKS. `peaks` are detector output for
/// the whole channel; amplitude pairs each consecutive in-window peak
/// with the trough between them.
inline std::array<double, kNumRespFeatures> compute_resp_features(
    const Channel& resp, std::span<const double> peaks, const Window& w,
    RespSpectrumCache* cache = nullptr) {
    std::array<double, kNumRespFeatures> out{kNaN, kNaN, 0.0};
    const double ws = w.start(), we = w.end();
    const std::size_t i0 = resp.index_at_or_after(ws);
    const std::size_t i1 = resp.index_at_or_after(we);

    auto peak_index = [&](double t) {
        const auto i =
            static_cast<std::size_t>(std::llround((t - resp.start_time) * resp.sample_rate));
        return std::min(i, resp.samples.size() - 1);
    };

    const auto p_lo = std::lower_bound(peaks.begin(), peaks.end(), ws);
    const auto p_hi = std::lower_bound(peaks.begin(), peaks.end(), we);
    const auto n_peaks = static_cast<std::size_t>(p_hi - p_lo);
    out[2] = static_cast<double>(n_peaks);

    if (n_peaks >= 2) {
        double s = 0.0;
        std::size_t n = 0;
        for (auto it = p_lo; it + 1 != p_hi; ++it) {
            const auto ia = peak_index(*it);
            const auto ib = peak_index(*(it + 1));
            if (ib <= ia + 1) continue;
            double trough = resp.samples[ia + 1];
            for (std::size_t i = ia + 1; i < ib; ++i)
                trough = std::min(trough, resp.samples[i]);
            s += 0.5 * (resp.samples[ia] + resp.samples[ib]) - trough;
            ++n;
        }
        if (n > 0) out[0] = s / static_cast<double>(n);
    }

    const std::size_t len = i1 - i0;
    if (len >= 2) {
        RespSpectrumCache local;
        RespSpectrumCache& c = cache ? *cache : local;
        auto it = c.tables.find(len);
        if (it == c.tables.end()) {
            // bins covering [0.05, 1] Hz at this slice length
            const double f0 = resp.sample_rate / static_cast<double>(len);
            const auto k_lo = static_cast<std::size_t>(std::max(1.0, std::ceil(0.05 / f0)));
            const auto k_hi = std::max(
                k_lo, std::min(len / 2, static_cast<std::size_t>(std::floor(1.0 / f0))));
            it = c.tables.emplace(len, feat_detail::BinPowerTable(len, k_lo, k_hi)).first;
        }
        const auto p = it->second.powers(std::span(resp.samples.data() + i0, len));
        std::size_t best = 0;
        for (std::size_t k = 1; k < p.size(); ++k)
            if (p[k] > p[best]) best = k;
        const double f0 = resp.sample_rate / static_cast<double>(len);
        out[1] = static_cast<double>(it->second.k_lo() + best) * f0;
    }
    return out;
}

/// Tonic and phasic window statistics plus raw-signal peak count
/// (prominence at least 0.05 of the window's std, 1 s minimum spacing).
inline std::array<double, kNumGsrFeatures> compute_gsr_features(const Channel& gsr,
                                                                const GSRComponents& comps,
                                                                const Window& w) {
    std::array<double, kNumGsrFeatures> out;
    out.fill(kNaN);
    const double ws = w.start(), we = w.end(), c = w.center;
    const std::size_t i0 = gsr.index_at_or_after(ws);
    const std::size_t i1 = gsr.index_at_or_after(we);
    const std::size_t c0 = gsr.index_at_or_after(c - 2.5);
    const std::size_t c1 = gsr.index_at_or_after(c + 2.5);
    const std::size_t h = gsr.index_at_or_after(c);

    std::size_t pos = 0;
    auto component_stats = [&](const std::vector<double>& x) {
        const std::span<const double> win(x.data() + i0, i1 - i0);
        const double avg15 = mean_of(win);
        const double avg5 = mean_of(std::span(x.data() + c0, c1 - c0));
        out[pos++] = avg15;
        out[pos++] = avg5;
        out[pos++] = feat_detail::safe_ratio(avg5, avg15);
        out[pos++] = mean_of(std::span(x.data() + h, i1 - h)) -
                     mean_of(std::span(x.data() + i0, h - i0));
        out[pos++] = population_std(win);
    };
    component_stats(comps.tonic);
    component_stats(comps.phasic);

    const std::span<const double> raw(gsr.samples.data() + i0, i1 - i0);
    const double sd = population_std(raw);
    const double min_prom = 0.05 * sd;
    double n_peaks = 0.0;
    if (min_prom > 0.0) {
        std::vector<double> gated(raw.size(), 0.0);
        bool any = false;
        for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
            if (raw[i] > raw[i - 1] && raw[i] > raw[i + 1] &&
                feat_detail::prominence(raw, i) >= min_prom) {
                gated[i] = raw[i];
                any = true;
            }
        }
        if (any) {
            const auto min_dist =
                std::max<std::size_t>(1, static_cast<std::size_t>(gsr.sample_rate));
            n_peaks =
                static_cast<double>(dsp::local_maxima_min_distance(gated, min_dist).size());
        }
    }
    out[10] = n_peaks;
    return out;
}

/// Blink count, offscreen share and the position/velocity statistics of
/// kept samples. Sample statistics (the last nine values) are NaN when a
/// window keeps fewer than 10 samples.
inline std::array<double, kNumGazeFeatures> compute_gaze_features(const GazeTrack& track,
                                                                  const Window& w) {
    std::array<double, kNumGazeFeatures> out;
    out.fill(kNaN);
    const double ws = w.start(), we = w.end();

    double blinks = 0.0;
    for (const auto& b : track.blinks) {
        const double mid = 0.5 * (b.start + b.end);
        if (mid >= ws && mid < we) blinks += 1.0;
    }
    out[0] = blinks;

    double off_overlap = 0.0;
    for (const auto& iv : track.offscreen) {
        const double a = std::max(iv.start, ws);
        const double b = std::min(iv.end, we);
        if (b > a) off_overlap += b - a;
    }
    out[1] = 100.0 * off_overlap / kWindowWidth;

    const auto s_lo = std::lower_bound(track.samples.begin(), track.samples.end(), ws,
                                       [](const GazeSample& g, double t) { return g.t < t; });
    const auto s_hi = std::lower_bound(track.samples.begin(), track.samples.end(), we,
                                       [](const GazeSample& g, double t) { return g.t < t; });
    if (s_hi - s_lo < 10) return out;

    std::vector<double> xs, ys, vel;
    xs.reserve(static_cast<std::size_t>(s_hi - s_lo));
    ys.reserve(xs.capacity());
    for (auto it = s_lo; it != s_hi; ++it) {
        xs.push_back(it->x);
        ys.push_back(it->y);
    }
    for (auto it = s_lo; it + 1 < s_hi; ++it) {
        const auto& a = *it;
        const auto& b = *(it + 1);
        if (b.t - a.t < 0.1) vel.push_back(std::hypot(b.x - a.x, b.y - a.y));
    }

    out[2] = mean_of(xs);
    out[3] = mean_of(ys);
    out[4] = population_std(xs);
    out[5] = population_std(ys);
    out[6] = excess_kurtosis(xs);
    out[7] = excess_kurtosis(ys);
    if (!vel.empty()) {
        out[8] = mean_of(vel);
        out[9] = population_std(vel);
        out[10] = excess_kurtosis(vel);
    }
    return out;
}

// ── Extractor ────────────────────────────────────────────────────────

/// Per-session extractor: runs preprocessing once, then evaluates windows.
class FeatureExtractor {
public:
    explicit FeatureExtractor(const RecordingSession& session)
        : session_(&session),
          ibi_(detect_r_peaks(session.channel(ChannelKind::ECG))),
          resp_peaks_(detect_resp_peaks(session.channel(ChannelKind::RESP))),
          gsr_(decompose_gsr(session.channel(ChannelKind::GSR))),
          gaze_(clean_gaze(session.gaze, session.screen)) {
        ibi_mids_.reserve(ibi_.intervals.size());
        for (std::size_t i = 0; i < ibi_.intervals.size(); ++i)
            ibi_mids_.push_back(ibi_.interval_mid(i));
    }

    const IBISeries& ibi() const { return ibi_; }
    const std::vector<double>& resp_peaks() const { return resp_peaks_; }
    const GSRComponents& gsr() const { return gsr_; }
    const GazeTrack& gaze() const { return gaze_; }

    FeatureVector extract(const Window& w, SignalSet set) const {
        FeatureVector fv;
        fv.player_id = session_->player_id;
        fv.window = w;
        fv.signal_set = set;
        fv.values.reserve(feature_count(set));

        const auto ecg = compute_ecg_features(ibi_, ibi_mids_, w);
        fv.values.insert(fv.values.end(), ecg.begin(), ecg.end());
        const auto resp = compute_resp_features(session_->channel(ChannelKind::RESP),
                                                resp_peaks_, w, &resp_cache_);
        fv.values.insert(fv.values.end(), resp.begin(), resp.end());
        if (set != SignalSet::Sig1) {
            const auto gsr = compute_gsr_features(session_->channel(ChannelKind::GSR), gsr_, w);
            fv.values.insert(fv.values.end(), gsr.begin(), gsr.end());
        }
        if (set == SignalSet::Sig3) {
            const auto gz = compute_gaze_features(gaze_, w);
            fv.values.insert(fv.values.end(), gz.begin(), gz.end());
        }
        return fv;
    }

private:
    const RecordingSession* session_;
    IBISeries ibi_;
    std::vector<double> resp_peaks_;
    GSRComponents gsr_;
    GazeTrack gaze_;
    std::vector<double> ibi_mids_;
    mutable RespSpectrumCache resp_cache_;
};

inline std::vector<FeatureVector> extract_features(const RecordingSession& session,
                                                   SignalSet set) {
    FeatureExtractor ex(session);
    std::vector<FeatureVector> out;
    for (const auto& w : slide_windows(session)) out.push_back(ex.extract(w, set));
    return out;
}

// ── Subject normalization ────────────────────────────────────────────

/// Per-player, per-feature mean and standard deviation fitted over the
/// player's full session, ignoring labels. NaN values are excluded.
struct SubjectStats {
    std::size_t n_features = 0;
    std::map<std::string, std::vector<std::pair<double, double>>> by_player;  // (mean, std)
};

inline SubjectStats fit_subject_stats(const std::vector<FeatureVector>& vectors) {
    SubjectStats stats;
    if (vectors.empty()) return stats;
    stats.n_features = vectors.front().values.size();

    std::map<std::string, std::vector<const FeatureVector*>> groups;
    for (const auto& v : vectors) groups[v.player_id].push_back(&v);

    for (const auto& [player, vs] : groups) {
        if (vs.size() < 2)
            throw Error("player '" + player + "' has fewer than 2 feature vectors");
        std::vector<std::pair<double, double>> ms(stats.n_features, {0.0, 1.0});
        for (std::size_t f = 0; f < stats.n_features; ++f) {
            double s = 0.0;
            std::size_t n = 0;
            for (const auto* v : vs) {
                const double x = v->values[f];
                if (!std::isnan(x)) {
                    s += x;
                    ++n;
                }
            }
            if (n == 0) continue;  // all NaN: stats stay (0, 1), values stay NaN
            const double mean = s / static_cast<double>(n);
            double ss = 0.0;
            for (const auto* v : vs) {
                const double x = v->values[f];
                if (!std::isnan(x)) ss += (x - mean) * (x - mean);
            }
            ms[f] = {mean, std::sqrt(ss / static_cast<double>(n))};
        }
        stats.by_player[player] = std::move(ms);
    }
    return stats;
}

/// Z-scores each vector with its player's stats; zero stds count as 1.
inline std::vector<FeatureVector> apply_normalization(std::vector<FeatureVector> vectors,
                                                      const SubjectStats& stats) {
    for (auto& v : vectors) {
        const auto it = stats.by_player.find(v.player_id);
        if (it == stats.by_player.end())
            throw UnknownPlayer("no normalization stats for player '" + v.player_id + "'");
        const auto& ms = it->second;
        for (std::size_t f = 0; f < v.values.size(); ++f) {
            double& x = v.values[f];
            if (std::isnan(x)) continue;
            const double sd = ms[f].second > 0.0 ? ms[f].second : 1.0;
            x = (x - ms[f].first) / sd;
        }
    }
    return vectors;
}

// ── Feature CSV ──────────────────────────────────────────────────────

inline std::string feature_csv_header(SignalSet set) {
    std::string h = "player_id,center_s,label";
    for (const auto& name : feature_names(set)) {
        h += ',';
        h += name;
    }
    h += '\n';
    return h;
}

inline void write_feature_csv(const std::vector<FeatureVector>& vectors, SignalSet set,
                              std::ostream& out) {
    out << feature_csv_header(set);
    for (const auto& v : vectors) {
        out << v.player_id << ',' << format_double(v.window.center) << ','
            << label_name(v.window.label);
        for (double x : v.values) {
            out << ',' << format_double(x);
        }
        out << '\n';
    }
}

inline void write_feature_csv(const std::vector<FeatureVector>& vectors, SignalSet set,
                              const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot create " + path.string());
    write_feature_csv(vectors, set, out);
}

inline std::vector<FeatureVector> read_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty feature file " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    if (header.size() < 4 || header[0] != "player_id" || header[1] != "center_s" ||
        header[2] != "label")
        throw IoError("bad feature header in " + path.string());
    const std::size_t nf = header.size() - 3;
    SignalSet set;
    if (nf == feature_count(SignalSet::Sig1)) set = SignalSet::Sig1;
    else if (nf == feature_count(SignalSet::Sig2)) set = SignalSet::Sig2;
    else if (nf == feature_count(SignalSet::Sig3)) set = SignalSet::Sig3;
    else throw IoError("unexpected feature count in " + path.string());
    for (std::size_t f = 0; f < nf; ++f)
        if (header[f + 3] != kCanonicalFeatureNames[f])
            throw IoError("feature column " + std::to_string(f + 3) + " out of order in " +
                          path.string());

    std::vector<FeatureVector> out;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw IoError("row " + std::to_string(row) + " has wrong column count in " +
                          path.string());
        FeatureVector v;
        v.player_id = fields[0];
        v.signal_set = set;
        if (!parse_double(fields[1], v.window.center))
            throw IoError("bad center_s in row " + std::to_string(row));
        const auto label = label_from_name(trim(fields[2]));
        if (!label) throw IoError("bad label in row " + std::to_string(row));
        v.window.label = *label;
        v.values.resize(nf);
        for (std::size_t f = 0; f < nf; ++f)
            if (!parse_double(fields[f + 3], v.values[f]))
                throw IoError("bad value in row " + std::to_string(row));
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace cogrec

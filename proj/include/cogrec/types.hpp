// types.hpp — session data model: labels, channels, gaze, recordings.
//
// A RecordingSession is the unit everything downstream consumes: one
// player, three uniformly sampled physiological channels, a gaze track,
// and a label track assigning activity to time intervals.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cogrec/errors.hpp"

namespace cogrec {

// ── Activity labels ──────────────────────────────────────────────────

/// The four activity classes. Integer codes are part of the file format
/// and the model contract: 0..3 in declaration order.
enum class ActivityLabel : int {
    SpaceInvaders = 0,
    Tetris = 1,
    TowerDefense = 2,
    Pause = 3,
};

inline constexpr int kNumLabels = 4;

inline constexpr std::array<std::string_view, kNumLabels> kLabelNames = {
    "SpaceInvaders", "Tetris", "TowerDefense", "Pause"};

inline std::string_view label_name(ActivityLabel l) {
    return kLabelNames[static_cast<std::size_t>(l)];
}

inline std::optional<ActivityLabel> label_from_name(std::string_view name) {
    for (int i = 0; i < kNumLabels; ++i)
        if (kLabelNames[static_cast<std::size_t>(i)] == name)
            return static_cast<ActivityLabel>(i);
    return std::nullopt;
}

inline bool is_game(ActivityLabel l) { return l != ActivityLabel::Pause; }

// ── Channels ─────────────────────────────────────────────────────────

enum class ChannelKind : int { ECG = 0, RESP = 1, GSR = 2 };

inline constexpr std::array<std::string_view, 3> kChannelNames = {"ECG", "RESP", "GSR"};

inline std::string_view channel_name(ChannelKind k) {
    return kChannelNames[static_cast<std::size_t>(k)];
}

inline std::optional<ChannelKind> channel_from_name(std::string_view name) {
    for (int i = 0; i < 3; ++i)
        if (kChannelNames[static_cast<std::size_t>(i)] == name)
            return static_cast<ChannelKind>(i);
    return std::nullopt;
}

/// One uniformly sampled signal. Sample i sits at
/// start_time + i / sample_rate seconds.
struct Channel {
    ChannelKind kind = ChannelKind::ECG;
    double sample_rate = 0.0;  // Hz, > 0
    double start_time = 0.0;   // seconds
    std::vector<double> samples;

    double end_time() const {
        if (samples.empty()) return start_time;
        return start_time + static_cast<double>(samples.size() - 1) / sample_rate;
    }
    double time_at(std::size_t i) const {
        return start_time + static_cast<double>(i) / sample_rate;
    }
    /// First sample index with time >= t (clamped to size()).
    std::size_t index_at_or_after(double t) const {
        if (t <= start_time) return 0;
        const double raw = (t - start_time) * sample_rate;
        auto idx = static_cast<std::size_t>(std::max(0.0, raw));
        while (idx > 0 && time_at(idx - 1) >= t) --idx;
        while (idx < samples.size() && time_at(idx) < t) ++idx;
        return idx;
    }
};

// ── Gaze ─────────────────────────────────────────────────────────────

/// One eye-tracker sample. When valid is false the tracker lost the
/// eyes (blink or dropout) and x/y carry no meaning.
struct GazeSample {
    double t = 0.0;  // seconds
    double x = 0.0;  // pixels
    double y = 0.0;  // pixels
    bool valid = true;
};

struct ScreenSize {
    int width_px = 1920;
    int height_px = 1080;
};

// ── Label track ──────────────────────────────────────────────────────

/// Half-open labeled interval [start, end).
struct LabelInterval {
    double start = 0.0;
    double end = 0.0;
    ActivityLabel label = ActivityLabel::Pause;
};

/// Sorted, non-overlapping labeled intervals. Gaps are allowed and simply
/// produce no windows.
struct LabelTrack {
    std::vector<LabelInterval> intervals;

    /// Throws OverlappingLabels / Error when the invariants fail.
    void validate() const {
        for (std::size_t i = 0; i < intervals.size(); ++i) {
            const auto& iv = intervals[i];
            if (!(iv.end > iv.start))
                throw Error("label interval " + std::to_string(i) + " has end <= start");
            if (i > 0 && intervals[i - 1].end > iv.start + 1e-12)
                throw OverlappingLabels("label intervals " + std::to_string(i - 1) + " and " +
                                        std::to_string(i) + " overlap or are unsorted");
        }
    }

    bool empty() const { return intervals.empty(); }
    double span_start() const { return intervals.empty() ? 0.0 : intervals.front().start; }
    double span_end() const { return intervals.empty() ? 0.0 : intervals.back().end; }

    /// Label at time t, or nullopt in a gap. Intervals are half-open.
    std::optional<ActivityLabel> label_at(double t) const {
        for (const auto& iv : intervals)
            if (t >= iv.start && t < iv.end) return iv.label;
        return std::nullopt;
    }
};

// ── Ground truth carried by synthetic sessions ───────────────────────

/// Side-channel metadata the generator leaves behind so detector output
/// can be scored. Empty for ingested real recordings.
struct SyntheticTruth {
    std::vector<double> ecg_beat_times;   // true R-peak times, seconds
    std::vector<double> resp_peak_times;  // true respiration peak times, seconds

    bool empty() const { return ecg_beat_times.empty() && resp_peak_times.empty(); }
};

// ── Recording session ────────────────────────────────────────────────

struct RecordingSession {
    std::string player_id;
    ScreenSize screen;
    std::array<Channel, 3> channels;  // indexed by ChannelKind
    std::vector<GazeSample> gaze;
    LabelTrack labels;
    SyntheticTruth truth;

    const Channel& channel(ChannelKind k) const {
        return channels[static_cast<std::size_t>(k)];
    }
    Channel& channel(ChannelKind k) { return channels[static_cast<std::size_t>(k)]; }

    /// Time range covered by all three channels.
    double recorded_start() const {
        double s = channels[0].start_time;
        for (const auto& c : channels) s = std::max(s, c.start_time);
        return s;
    }
    double recorded_end() const {
        double e = channels[0].end_time();
        for (const auto& c : channels) e = std::min(e, c.end_time());
        return e;
    }

    /// Full invariant check; throws on violation.
    void validate() const {
        if (player_id.empty()) throw Error("session has empty player_id");
        if (screen.width_px <= 0 || screen.height_px <= 0)
            throw Error("session '" + player_id + "' has non-positive screen size");
        for (const auto& c : channels) {
            if (c.sample_rate <= 0.0)
                throw Error(std::string(channel_name(c.kind)) + " sample rate must be > 0");
            if (c.samples.empty())
                throw Error(std::string(channel_name(c.kind)) + " channel has no samples");
            for (std::size_t i = 0; i < c.samples.size(); ++i)
                if (std::isnan(c.samples[i]))
                    throw NaNSample(std::string(channel_name(c.kind)) + " sample " +
                                    std::to_string(i) + " is NaN");
        }
        labels.validate();
        for (std::size_t i = 1; i < gaze.size(); ++i)
            if (!(gaze[i].t > gaze[i - 1].t))
                throw Error("gaze timestamps not strictly increasing at row " +
                            std::to_string(i));
        if (!labels.empty()) {
            if (recorded_start() > labels.span_start() + 1e-9 ||
                recorded_end() < labels.span_end() - 1e-9)
                throw Error("channels of '" + player_id + "' do not cover the label track");
        }
    }
};

using Corpus = std::vector<RecordingSession>;

}  // namespace cogrec

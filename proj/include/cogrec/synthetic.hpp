// synthetic.hpp — seeded synthetic corpus generator.
//
// Emulates the recording protocol: each player plays rounds_per_game
// rounds of each of the three games, rounds separated by pauses, game
// order shuffled per player. Signals carry configurable per-player
// baselines and per-game signatures plus per-(player, game) idiosyncratic
// jitter so that within-player structure is stronger than cross-player
// structure, as in real recordings.
//
// ECG is an impulse-train-plus-wave at the instantaneous heart rate,
// RESP a sinusoid at the breath rate, GSR tonic drift plus phasic
// exponential-decay events, gaze a game-specific spatial point process
// with blink gaps. True beat and breath-peak times are retained on the
// session so detectors can be scored against them.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cogrec/types.hpp"
#include "cogrec/util.hpp"

namespace cogrec {

// ── Configuration ────────────────────────────────────────────────────

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

/// Uniform-range baselines drawn once per player.
struct PlayerBaselines {
    Range resting_hr_bpm{62.0, 84.0};
    Range hr_std_ms{18.0, 50.0};       // IBI jitter std at rest
    Range breath_rate_hz{0.20, 0.30};
    Range gsr_tonic_level{3.0, 9.0};   // microsiemens
    Range gaze_noise_px{8.0, 28.0};
    Range response_scale{0.55, 1.45};  // multiplies every game delta
    Range transition_tau_s{4.0, 12.0}; // autonomic settling time constant
};

enum class GazePattern { HorizontalBand, CentralColumn, Clusters, CenterDrift };

/// Gaze signature of one activity: where fixations land and how widely.
/// Coordinates and dispersions are fractions of the screen size.
struct GazeSignature {
    GazePattern pattern = GazePattern::CenterDrift;
    double centroid_fx = 0.5;
    double centroid_fy = 0.5;
    double dispersion_fx = 0.2;
    double dispersion_fy = 0.2;
    double fixation_dwell_s = 0.45;
    double blink_rate_per_min = 10.0;
    double offscreen_rate_per_min = 0.0;
};

/// Physiological signature of one activity, relative to the player's
/// resting baseline.
struct GameSignature {
    double hr_delta_bpm = 0.0;
    double breath_shift_hz = 0.0;
    double gsr_event_rate_per_min = 2.0;
    double gsr_tonic_shift = 0.0;   // microsiemens
    double hrv_suppression = 1.0;   // multiplies the IBI jitter std
    GazeSignature gaze;
};

struct SyntheticConfig {
    int n_players = 20;
    int rounds_per_game = 4;
    double round_len = 300.0;  // seconds
    double pause_len = 60.0;   // seconds
    std::uint64_t seed = 0;

    double ecg_rate_hz = 250.0;
    double resp_rate_hz = 25.0;
    double gsr_rate_hz = 25.0;
    double gaze_rate_hz = 60.0;
    ScreenSize screen{1920, 1080};

    double ecg_noise_mv = 0.04;

    PlayerBaselines baselines;

    // Indexed by ActivityLabel code. Pause doubles as the baseline state.
    std::array<GameSignature, kNumLabels> signatures = default_signatures();

    // Per-(player, game) idiosyncrasy: additive jitter applied on top of
    // the shared signature, drawn once per player per game. Setting these
    // to zero makes all players respond identically.
    double player_game_hr_jitter_bpm = 3.5;
    double player_game_breath_jitter_hz = 0.022;
    double player_game_gsr_rate_jitter = 2.0;
    double player_game_hrv_jitter = 0.12;
    double player_game_gaze_jitter_frac = 0.045;  // centroid offset, screen fraction
    Range player_blink_factor{0.7, 1.4};
    Range player_gaze_dispersion_factor{0.8, 1.25};

    static std::array<GameSignature, kNumLabels> default_signatures() {
        std::array<GameSignature, kNumLabels> s;
        auto& si = s[static_cast<int>(ActivityLabel::SpaceInvaders)];
        si.hr_delta_bpm = 8.0;
        si.breath_shift_hz = 0.035;
        si.gsr_event_rate_per_min = 7.0;
        si.gsr_tonic_shift = 0.35;
        si.hrv_suppression = 0.72;
        si.gaze = {GazePattern::HorizontalBand, 0.50, 0.80, 0.26, 0.045, 0.35, 7.0, 0.1};

        auto& te = s[static_cast<int>(ActivityLabel::Tetris)];
        te.hr_delta_bpm = 12.0;
        te.breath_shift_hz = 0.055;
        te.gsr_event_rate_per_min = 9.5;
        te.gsr_tonic_shift = 0.55;
        te.hrv_suppression = 0.60;
        te.gaze = {GazePattern::CentralColumn, 0.50, 0.48, 0.055, 0.24, 0.45, 5.5, 0.1};

        auto& td = s[static_cast<int>(ActivityLabel::TowerDefense)];
        td.hr_delta_bpm = 5.0;
        td.breath_shift_hz = 0.018;
        td.gsr_event_rate_per_min = 4.5;
        td.gsr_tonic_shift = 0.20;
        td.hrv_suppression = 0.85;
        td.gaze = {GazePattern::Clusters, 0.50, 0.50, 0.30, 0.26, 0.55, 9.0, 0.2};

        auto& pa = s[static_cast<int>(ActivityLabel::Pause)];
        pa.hr_delta_bpm = 0.0;
        pa.breath_shift_hz = 0.0;
        pa.gsr_event_rate_per_min = 1.5;
        pa.gsr_tonic_shift = 0.0;
        pa.hrv_suppression = 1.0;
        pa.gaze = {GazePattern::CenterDrift, 0.50, 0.45, 0.16, 0.14, 1.10, 18.0, 3.0};
        return s;
    }

    void validate() const {
        if (n_players < 1) throw Error("n_players must be >= 1");
        if (rounds_per_game < 1) throw Error("rounds_per_game must be >= 1");
        if (round_len <= 0 || pause_len <= 0) throw Error("round/pause lengths must be > 0");
        for (const Range* r : {&baselines.resting_hr_bpm, &baselines.hr_std_ms,
                               &baselines.breath_rate_hz, &baselines.gsr_tonic_level,
                               &baselines.gaze_noise_px, &baselines.response_scale,
                               &baselines.transition_tau_s}) {
            if (r->hi < r->lo) throw Error("baseline range has hi < lo");
        }
        if (ecg_rate_hz < 100.0) throw Error("ECG rate must be >= 100 Hz");
    }
};

/// Closed-form schedule arithmetic: 3*rpg rounds, a pause between each
/// consecutive pair of rounds.
inline int expected_interval_count(const SyntheticConfig& cfg) {
    return 6 * cfg.rounds_per_game - 1;
}
inline int expected_round_count(const SyntheticConfig& cfg) { return 3 * cfg.rounds_per_game; }
inline double expected_duration(const SyntheticConfig& cfg) {
    return 3 * cfg.rounds_per_game * cfg.round_len +
           (3 * cfg.rounds_per_game - 1) * cfg.pause_len;
}

// ── Generator internals ──────────────────────────────────────────────

namespace synth_detail {

inline double uniform_in(Range r, std::mt19937_64& rng) {
    return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

/// Piecewise-constant target followed with first-order (exponential) lag.
/// Entry values are chained across intervals so the trace is continuous.
class LaggedSteps {
public:
    LaggedSteps(const std::vector<LabelInterval>& intervals, std::vector<double> targets,
                double tau, double initial)
        : intervals_(&intervals), targets_(std::move(targets)), tau_(tau) {
        entry_.resize(targets_.size());
        double v = initial;
        for (std::size_t i = 0; i < targets_.size(); ++i) {
            entry_[i] = v;
            const double len = (*intervals_)[i].end - (*intervals_)[i].start;
            v = targets_[i] + (v - targets_[i]) * std::exp(-len / tau_);
        }
    }

    double at(double t) const {
        // callers sweep t forward; keep a cursor
        while (cursor_ + 1 < intervals_->size() && t >= (*intervals_)[cursor_ + 1].start)
            ++cursor_;
        while (cursor_ > 0 && t < (*intervals_)[cursor_].start) --cursor_;
        const double dt = t - (*intervals_)[cursor_].start;
        const double tgt = targets_[cursor_];
        return tgt + (entry_[cursor_] - tgt) * std::exp(-dt / tau_);
    }

private:
    const std::vector<LabelInterval>* intervals_;
    std::vector<double> targets_;
    std::vector<double> entry_;
    double tau_;
    mutable std::size_t cursor_ = 0;
};

struct PlayerProfile {
    double resting_hr = 70.0;
    double hr_std_ms = 30.0;
    double breath_rate = 0.25;
    double gsr_level = 5.0;
    double gaze_noise_px = 15.0;
    double response_scale = 1.0;
    double tau = 8.0;
    // additive per-game jitter, indexed by label code
    std::array<double, kNumLabels> hr_jitter{};
    std::array<double, kNumLabels> breath_jitter{};
    std::array<double, kNumLabels> gsr_rate_jitter{};
    std::array<double, kNumLabels> hrv_jitter{};
    std::array<double, kNumLabels> gaze_dx{};  // centroid offsets, screen fraction
    std::array<double, kNumLabels> gaze_dy{};
    double blink_factor = 1.0;
    double dispersion_factor = 1.0;
    // Tower Defense cluster layout, fractions of the screen
    std::vector<std::pair<double, double>> clusters;
};

inline PlayerProfile make_profile(const SyntheticConfig& cfg, std::mt19937_64& rng) {
    PlayerProfile p;
    p.resting_hr = uniform_in(cfg.baselines.resting_hr_bpm, rng);
    p.hr_std_ms = uniform_in(cfg.baselines.hr_std_ms, rng);
    p.breath_rate = uniform_in(cfg.baselines.breath_rate_hz, rng);
    p.gsr_level = uniform_in(cfg.baselines.gsr_tonic_level, rng);
    p.gaze_noise_px = uniform_in(cfg.baselines.gaze_noise_px, rng);
    p.response_scale = uniform_in(cfg.baselines.response_scale, rng);
    p.tau = uniform_in(cfg.baselines.transition_tau_s, rng);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int g = 0; g < kNumLabels; ++g) {
        p.hr_jitter[g] = cfg.player_game_hr_jitter_bpm * gauss(rng);
        p.breath_jitter[g] = cfg.player_game_breath_jitter_hz * gauss(rng);
        p.gsr_rate_jitter[g] = cfg.player_game_gsr_rate_jitter * gauss(rng);
        p.hrv_jitter[g] = cfg.player_game_hrv_jitter * gauss(rng);
        p.gaze_dx[g] = cfg.player_game_gaze_jitter_frac * gauss(rng);
        p.gaze_dy[g] = cfg.player_game_gaze_jitter_frac * gauss(rng);
    }
    p.blink_factor = uniform_in(cfg.player_blink_factor, rng);
    p.dispersion_factor = uniform_in(cfg.player_gaze_dispersion_factor, rng);
    std::uniform_real_distribution<double> cpos(0.15, 0.85);
    for (int c = 0; c < 5; ++c) p.clusters.emplace_back(cpos(rng), cpos(rng));
    return p;
}

/// Per-interval target for a quantity that rests at `base` during pauses
/// and shifts by the (player-adjusted) game delta during games.
inline std::vector<double> interval_targets(const std::vector<LabelInterval>& ivs,
                                            const SyntheticConfig& cfg,
                                            const PlayerProfile& p, double base,
                                            auto delta_of) {
    std::vector<double> t;
    t.reserve(ivs.size());
    for (const auto& iv : ivs) {
        const int g = static_cast<int>(iv.label);
        t.push_back(base + p.response_scale * delta_of(cfg.signatures[g], g));
    }
    return t;
}

}  // namespace synth_detail

// ── Schedule ─────────────────────────────────────────────────────────

/// Round/pause layout for one player. Game order is a seeded shuffle.
inline LabelTrack make_schedule(const SyntheticConfig& cfg, std::mt19937_64& rng) {
    std::array<ActivityLabel, 3> order = {ActivityLabel::SpaceInvaders, ActivityLabel::Tetris,
                                          ActivityLabel::TowerDefense};
    std::shuffle(order.begin(), order.end(), rng);
    LabelTrack track;
    double t = 0.0;
    int rounds_emitted = 0;
    const int total_rounds = 3 * cfg.rounds_per_game;
    for (ActivityLabel game : order) {
        for (int r = 0; r < cfg.rounds_per_game; ++r) {
            track.intervals.push_back({t, t + cfg.round_len, game});
            t += cfg.round_len;
            ++rounds_emitted;
            if (rounds_emitted < total_rounds) {
                track.intervals.push_back({t, t + cfg.pause_len, ActivityLabel::Pause});
                t += cfg.pause_len;
            }
        }
    }
    return track;
}

// ── Session synthesis ────────────────────────────────────────────────

inline RecordingSession generate_session(const SyntheticConfig& cfg, int player_index) {
    using namespace synth_detail;
    cfg.validate();

    const std::uint64_t base = derive_seed(cfg.seed, /*stream=*/1,
                                           static_cast<std::uint64_t>(player_index));
    std::mt19937_64 rng_sched(derive_seed(base, 2));
    std::mt19937_64 rng_param(derive_seed(base, 3));
    std::mt19937_64 rng_ecg(derive_seed(base, 4));
    std::mt19937_64 rng_resp(derive_seed(base, 5));
    std::mt19937_64 rng_gsr(derive_seed(base, 6));
    std::mt19937_64 rng_gaze(derive_seed(base, 7));

    RecordingSession s;
    {
        std::string id = std::to_string(player_index + 1);
        while (id.size() < 2) id.insert(id.begin(), '0');
        s.player_id = "p" + id;
    }
    s.screen = cfg.screen;
    s.labels = make_schedule(cfg, rng_sched);
    const auto& ivs = s.labels.intervals;
    const double duration = s.labels.span_end();

    const PlayerProfile prof = make_profile(cfg, rng_param);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // ---- ECG -----------------------------------------------------------
    {
        LaggedSteps hr_of(ivs,
                          interval_targets(ivs, cfg, prof, prof.resting_hr,
                                           [&](const GameSignature& g, int code) {
                                               return g.hr_delta_bpm + prof.hr_jitter[code] /
                                                                           prof.response_scale;
                                           }),
                          prof.tau, prof.resting_hr);
        LaggedSteps hrv_of(ivs,
                           [&] {
                               std::vector<double> t;
                               for (const auto& iv : ivs) {
                                   const int g = static_cast<int>(iv.label);
                                   t.push_back(std::max(
                                       0.15, cfg.signatures[g].hrv_suppression + prof.hrv_jitter[g]));
                               }
                               return t;
                           }(),
                           prof.tau, 1.0);

        std::vector<double> beats;
        double ar = 0.0;  // AR(1) state of the IBI deviation, seconds
        const double rho = 0.6;
        double t = 0.35 + 0.3 * std::uniform_real_distribution<double>(0.0, 1.0)(rng_ecg);
        while (t < duration) {
            beats.push_back(t);
            const double hr = std::clamp(hr_of.at(t), 35.0, 190.0);
            const double sigma =
                prof.hr_std_ms / 1000.0 * hrv_of.at(t) * std::sqrt(1.0 - rho * rho);
            ar = rho * ar + sigma * gauss(rng_ecg);
            const double ibi = std::clamp(60.0 / hr + ar, 0.34, 1.9);
            t += ibi;
        }

        Channel ecg;
        ecg.kind = ChannelKind::ECG;
        ecg.sample_rate = cfg.ecg_rate_hz;
        ecg.start_time = 0.0;
        const auto n = static_cast<std::size_t>(duration * cfg.ecg_rate_hz) + 1;
        ecg.samples.assign(n, 0.0);

        // baseline wander + measurement noise
        const double ph1 = std::uniform_real_distribution<double>(0.0, 6.28)(rng_ecg);
        const double ph2 = std::uniform_real_distribution<double>(0.0, 6.28)(rng_ecg);
        for (std::size_t i = 0; i < n; ++i) {
            const double ti = ecg.time_at(i);
            ecg.samples[i] = 0.05 * std::sin(2.0 * std::numbers::pi * 0.11 * ti + ph1) +
                             0.03 * std::sin(2.0 * std::numbers::pi * 0.23 * ti + ph2) +
                             cfg.ecg_noise_mv * gauss(rng_ecg);
        }

        // P-QRS-T bumps around each beat
        struct Bump {
            double amp, center, width;
        };
        const Bump bumps[] = {{0.13, -0.17, 0.030},   // P
                              {-0.10, -0.024, 0.008}, // Q
                              {1.00, 0.0, 0.009},     // R
                              {-0.16, 0.026, 0.008},  // S
                              {0.24, 0.19, 0.045}};   // T
        for (double b : beats) {
            const double lo = b - 0.30, hi = b + 0.38;
            auto i0 = static_cast<std::size_t>(std::max(0.0, lo * cfg.ecg_rate_hz));
            auto i1 = std::min(n, static_cast<std::size_t>(std::max(0.0, hi * cfg.ecg_rate_hz)) + 1);
            for (std::size_t i = i0; i < i1; ++i) {
                const double dt = ecg.time_at(i) - b;
                double v = 0.0;
                for (const auto& w : bumps) {
                    const double z = (dt - w.center) / w.width;
                    if (std::abs(z) < 6.0) v += w.amp * std::exp(-0.5 * z * z);
                }
                ecg.samples[i] += v;
            }
        }
        s.channels[static_cast<std::size_t>(ChannelKind::ECG)] = std::move(ecg);
        s.truth.ecg_beat_times = std::move(beats);
    }

    // ---- RESP ----------------------------------------------------------
    {
        LaggedSteps rate_of(ivs,
                            interval_targets(ivs, cfg, prof, prof.breath_rate,
                                             [&](const GameSignature& g, int code) {
                                                 return g.breath_shift_hz +
                                                        prof.breath_jitter[code] /
                                                            prof.response_scale;
                                             }),
                            prof.tau, prof.breath_rate);
        Channel resp;
        resp.kind = ChannelKind::RESP;
        resp.sample_rate = cfg.resp_rate_hz;
        resp.start_time = 0.0;
        const auto n = static_cast<std::size_t>(duration * cfg.resp_rate_hz) + 1;
        resp.samples.assign(n, 0.0);
        const double amp = 0.6 + 0.8 * std::uniform_real_distribution<double>(0.0, 1.0)(rng_resp);
        double phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng_resp);
        const double dt = 1.0 / cfg.resp_rate_hz;
        for (std::size_t i = 0; i < n; ++i) {
            const double ti = resp.time_at(i);
            resp.samples[i] = amp * std::sin(phase) + 0.02 * amp * gauss(rng_resp);
            // record the true peak each time the phase passes pi/2 (mod 2pi)
            const double rate = std::clamp(rate_of.at(ti), 0.05, 1.0);
            const double next = phase + 2.0 * std::numbers::pi * rate * dt;
            const double k0 = std::floor((phase - std::numbers::pi / 2.0) /
                                         (2.0 * std::numbers::pi));
            const double crossing = (k0 + 1.0) * 2.0 * std::numbers::pi + std::numbers::pi / 2.0;
            if (next > crossing && i + 1 < n) {
                const double frac = (crossing - phase) / (next - phase);
                s.truth.resp_peak_times.push_back(ti + frac * dt);
            }
            phase = next;
        }
        s.channels[static_cast<std::size_t>(ChannelKind::RESP)] = std::move(resp);
    }

    // ---- GSR -----------------------------------------------------------
    {
        LaggedSteps tonic_of(ivs,
                             interval_targets(ivs, cfg, prof, prof.gsr_level,
                                              [&](const GameSignature& g, int) {
                                                  return g.gsr_tonic_shift;
                                              }),
                             prof.tau * 1.8, prof.gsr_level);
        Channel gsr;
        gsr.kind = ChannelKind::GSR;
        gsr.sample_rate = cfg.gsr_rate_hz;
        gsr.start_time = 0.0;
        const auto n = static_cast<std::size_t>(duration * cfg.gsr_rate_hz) + 1;
        gsr.samples.assign(n, 0.0);
        const double ph1 = std::uniform_real_distribution<double>(0.0, 6.28)(rng_gsr);
        const double ph2 = std::uniform_real_distribution<double>(0.0, 6.28)(rng_gsr);
        for (std::size_t i = 0; i < n; ++i) {
            const double ti = gsr.time_at(i);
            gsr.samples[i] = tonic_of.at(ti) +
                             0.30 * std::sin(2.0 * std::numbers::pi * ti / 900.0 + ph1) +
                             0.18 * std::sin(2.0 * std::numbers::pi * ti / 1400.0 + ph2) +
                             0.008 * gauss(rng_gsr);
        }
        // phasic events: Poisson per interval at the game-specific rate
        const double tau_r = 0.7, tau_d = 2.8;
        const double tpk = tau_r * tau_d / (tau_d - tau_r) * std::log(tau_d / tau_r);
        const double norm = 1.0 / (std::exp(-tpk / tau_d) - std::exp(-tpk / tau_r));
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        for (const auto& iv : ivs) {
            const int g = static_cast<int>(iv.label);
            const double rate =
                std::max(0.05, cfg.signatures[g].gsr_event_rate_per_min +
                                   prof.gsr_rate_jitter[g] * prof.response_scale) /
                60.0;
            double t = iv.start - std::log(u01(rng_gsr)) / rate;
            while (t < iv.end) {
                const double a = (0.3 + 0.9 * u01(rng_gsr)) * prof.response_scale;
                const auto i0 = static_cast<std::size_t>(t * cfg.gsr_rate_hz) + 1;
                const auto i1 = std::min(n, i0 + static_cast<std::size_t>(12.0 * cfg.gsr_rate_hz));
                for (std::size_t i = i0; i < i1; ++i) {
                    const double dt = gsr.time_at(i) - t;
                    gsr.samples[i] += a * norm * (std::exp(-dt / tau_d) - std::exp(-dt / tau_r));
                }
                t += -std::log(u01(rng_gsr)) / rate;
            }
        }
        s.channels[static_cast<std::size_t>(ChannelKind::GSR)] = std::move(gsr);
    }

    // ---- Gaze ----------------------------------------------------------
    {
        const double W = cfg.screen.width_px, H = cfg.screen.height_px;
        const double dt = 1.0 / cfg.gaze_rate_hz;
        std::uniform_real_distribution<double> u01(0.0, 1.0);

        double fx = 0.5 * W, fy = 0.5 * H;  // current fixation point
        double fix_until = 0.0;
        double blink_until = -1.0, off_until = -1.0;
        double next_blink = 0.0, next_off = 0.0;
        double off_x = 0.0, off_y = 0.0;
        std::size_t cursor = 0;
        int last_label = -1;

        auto sample_fixation = [&](const GazeSignature& gs, int code, std::mt19937_64& r) {
            std::normal_distribution<double> nd(0.0, 1.0);
            const double cx = gs.centroid_fx + prof.gaze_dx[code];
            const double cy = gs.centroid_fy + prof.gaze_dy[code];
            const double dx = gs.dispersion_fx * prof.dispersion_factor;
            const double dy = gs.dispersion_fy * prof.dispersion_factor;
            double x = cx, y = cy;
            switch (gs.pattern) {
                case GazePattern::HorizontalBand:
                    x = cx + (u01(r) - 0.5) * 2.0 * dx * 1.7;
                    y = cy + nd(r) * dy;
                    break;
                case GazePattern::CentralColumn:
                    x = cx + nd(r) * dx;
                    y = cy + (u01(r) - 0.5) * 2.0 * dy * 1.7;
                    break;
                case GazePattern::Clusters: {
                    const auto& c =
                        prof.clusters[static_cast<std::size_t>(u01(r) * 0.9999 *
                                                               static_cast<double>(
                                                                   prof.clusters.size()))];
                    x = c.first + prof.gaze_dx[code] + nd(r) * 0.05;
                    y = c.second + prof.gaze_dy[code] + nd(r) * 0.05;
                    break;
                }
                case GazePattern::CenterDrift:
                    x = cx + nd(r) * dx;
                    y = cy + nd(r) * dy;
                    break;
            }
            fx = std::clamp(x, 0.02, 0.98) * W;
            fy = std::clamp(y, 0.02, 0.98) * H;
        };

        const auto n = static_cast<std::size_t>(duration * cfg.gaze_rate_hz) + 1;
        s.gaze.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) * dt;
            while (cursor + 1 < ivs.size() && t >= ivs[cursor + 1].start) ++cursor;
            const int code = static_cast<int>(ivs[cursor].label);
            const GazeSignature& gs = cfg.signatures[code].gaze;

            const double blink_rate = gs.blink_rate_per_min * prof.blink_factor;
            if (code != last_label) {
                // new activity: resample schedule clocks and the fixation
                last_label = code;
                next_blink = t + (blink_rate > 0
                                      ? -std::log(u01(rng_gaze)) * 60.0 / blink_rate
                                      : 1e18);
                next_off = t + (gs.offscreen_rate_per_min > 0
                                    ? -std::log(u01(rng_gaze)) * 60.0 / gs.offscreen_rate_per_min
                                    : 1e18);
                sample_fixation(gs, code, rng_gaze);
                fix_until = t + std::min(2.0, -std::log(u01(rng_gaze)) * gs.fixation_dwell_s);
            }

            GazeSample g;
            g.t = t;
            if (t < blink_until) {
                g.valid = false;
            } else if (t < off_until) {
                g.valid = true;
                g.x = off_x;
                g.y = off_y;
            } else {
                if (t >= next_blink) {
                    blink_until = t + 0.10 + 0.25 * u01(rng_gaze);
                    next_blink = t + (blink_rate > 0
                                          ? -std::log(u01(rng_gaze)) * 60.0 / blink_rate
                                          : 1e18);
                    g.valid = false;
                } else if (t >= next_off) {
                    off_until = t + 0.8 + 2.2 * u01(rng_gaze);
                    next_off = t + (gs.offscreen_rate_per_min > 0
                                        ? -std::log(u01(rng_gaze)) * 60.0 /
                                              gs.offscreen_rate_per_min
                                        : 1e18);
                    off_x = u01(rng_gaze) < 0.5 ? -(40.0 + 260.0 * u01(rng_gaze))
                                                : W + 40.0 + 260.0 * u01(rng_gaze);
                    off_y = fy;
                    g.valid = true;
                    g.x = off_x;
                    g.y = off_y;
                } else {
                    if (t >= fix_until) {
                        sample_fixation(gs, code, rng_gaze);
                        fix_until =
                            t + std::min(2.0, std::max(0.08, -std::log(u01(rng_gaze)) *
                                                                 gs.fixation_dwell_s));
                    }
                    std::normal_distribution<double> nd(0.0, prof.gaze_noise_px);
                    g.valid = true;
                    g.x = std::clamp(fx + nd(rng_gaze), 0.0, W - 1.0);
                    g.y = std::clamp(fy + nd(rng_gaze), 0.0, H - 1.0);
                }
            }
            s.gaze.push_back(g);
        }
    }

    s.validate();
    return s;
}

inline Corpus generate_corpus(const SyntheticConfig& cfg) {
    cfg.validate();
    Corpus corpus;
    corpus.reserve(static_cast<std::size_t>(cfg.n_players));
    for (int i = 0; i < cfg.n_players; ++i) corpus.push_back(generate_session(cfg, i));
    return corpus;
}

}  // namespace cogrec

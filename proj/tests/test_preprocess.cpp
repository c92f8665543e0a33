// R-peak detection, respiration peaks, GSR decomposition, gaze cleaning.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "cogrec/preprocess.hpp"
#include "cogrec/synthetic.hpp"

using namespace cogrec;

namespace {

Channel make_channel(ChannelKind kind, double rate, std::vector<double> samples) {
    Channel c;
    c.kind = kind;
    c.sample_rate = rate;
    c.start_time = 0.0;
    c.samples = std::move(samples);
    return c;
}

/// Impulse train: unit spikes at the given beat times, zero elsewhere.
Channel impulse_ecg(const std::vector<double>& beats, double rate, double duration) {
    std::vector<double> x(static_cast<std::size_t>(duration * rate) + 1, 0.0);
    for (double b : beats) x[static_cast<std::size_t>(std::llround(b * rate))] = 1.0;
    return make_channel(ChannelKind::ECG, rate, std::move(x));
}

/// Greedy nearest matching of detected peaks to truth within a tolerance;
/// returns (sensitivity, precision).
std::pair<double, double> score_peaks(const std::vector<double>& truth,
                                      const std::vector<double>& detected, double tol) {
    std::size_t tp = 0, di = 0;
    for (double t : truth) {
        while (di < detected.size() && detected[di] < t - tol) ++di;
        if (di < detected.size() && std::abs(detected[di] - t) <= tol) {
            ++tp;
            ++di;
        }
    }
    const double sens = truth.empty() ? 1.0 : (double)tp / (double)truth.size();
    const double prec = detected.empty() ? 1.0 : (double)tp / (double)detected.size();
    return {sens, prec};
}

}  // namespace

// ── detect_r_peaks ───────────────────────────────────────────────────

TEST_CASE("60 bpm impulse train yields 60 peaks with 1000 ms intervals") {
    std::vector<double> beats;
    for (int i = 0; i < 60; ++i) beats.push_back(0.5 + (double)i);
    const auto ecg = impulse_ecg(beats, 250.0, 60.5);

    const auto ibi = detect_r_peaks(ecg);
    REQUIRE(ibi.peak_times.size() == 60);
    REQUIRE(ibi.intervals.size() == 59);
    for (std::size_t i = 0; i < beats.size(); ++i)
        REQUIRE(ibi.peak_times[i] == Catch::Approx(beats[i]).margin(0.020));
    for (double v : ibi.intervals) REQUIRE(v == Catch::Approx(1000.0).margin(8.0));
}

TEST_CASE("flat and short ECG inputs are rejected") {
    REQUIRE_THROWS_AS(
        detect_r_peaks(make_channel(ChannelKind::ECG, 250.0,
                                    std::vector<double>(250 * 20, 0.0))),
        FlatSignal);
    std::vector<double> short_sig(250 * 5, 0.0);
    short_sig[100] = 1.0;
    REQUIRE_THROWS_AS(detect_r_peaks(make_channel(ChannelKind::ECG, 250.0, short_sig)),
                      TooShort);
    REQUIRE_THROWS_AS(detect_r_peaks(make_channel(ChannelKind::ECG, 50.0,
                                                  std::vector<double>(5000, 0.0))),
                      TooShort);
}

TEST_CASE("a missing beat leaves a rejected 2000 ms interval") {
    std::vector<double> beats;
    for (int i = 0; i < 60; ++i)
        if (i != 30) beats.push_back(0.5 + (double)i);
    const auto ibi = detect_r_peaks(impulse_ecg(beats, 250.0, 60.5));

    REQUIRE(ibi.peak_times.size() == 59);
    std::size_t nan_count = 0;
    for (double v : ibi.intervals) {
        if (std::isnan(v))
            ++nan_count;
        else
            REQUIRE(v == Catch::Approx(1000.0).margin(8.0));
    }
    REQUIRE(nan_count == 1);
    // the rejected slot is the one spanning the gap
    const auto gap = static_cast<std::size_t>(29);
    REQUIRE(std::isnan(ibi.intervals[gap]));
}

TEST_CASE("R-peak detection scores >= 0.99 on generated ECG") {
    SyntheticConfig cfg;
    cfg.n_players = 2;
    cfg.rounds_per_game = 1;
    cfg.round_len = 90.0;
    cfg.pause_len = 30.0;
    cfg.seed = 42;
    for (int p = 0; p < cfg.n_players; ++p) {
        const auto s = generate_session(cfg, p);
        const auto ibi = detect_r_peaks(s.channel(ChannelKind::ECG));
        const auto [sens, prec] = score_peaks(s.truth.ecg_beat_times, ibi.peak_times, 0.05);
        REQUIRE(sens >= 0.99);
        REQUIRE(prec >= 0.99);
    }
}

// ── detect_resp_peaks ────────────────────────────────────────────────

TEST_CASE("respiration peaks on a 0.2 Hz sinusoid") {
    const double rate = 25.0;
    std::vector<double> x;
    for (std::size_t i = 0; i <= (std::size_t)(15.0 * rate); ++i)
        x.push_back(std::sin(2.0 * std::numbers::pi * 0.2 * (double)i / rate));
    const auto peaks = detect_resp_peaks(make_channel(ChannelKind::RESP, rate, x));
    REQUIRE(peaks.size() == 3);
    // crests of sin at 1.25, 6.25, 11.25 s
    REQUIRE(peaks[0] == Catch::Approx(1.25).margin(0.3));
    REQUIRE(peaks[1] == Catch::Approx(6.25).margin(0.3));
    REQUIRE(peaks[2] == Catch::Approx(11.25).margin(0.3));

    SECTION("minimum peak spacing holds") {
        for (std::size_t i = 1; i < peaks.size(); ++i)
            REQUIRE(peaks[i] - peaks[i - 1] >= 1.5);
    }
}

TEST_CASE("constant respiration has no peaks; short input throws") {
    REQUIRE(detect_resp_peaks(make_channel(ChannelKind::RESP, 25.0,
                                           std::vector<double>(600, 3.0)))
                .empty());
    REQUIRE_THROWS_AS(detect_resp_peaks(make_channel(ChannelKind::RESP, 25.0,
                                                     std::vector<double>(250, 0.0))),
                      TooShort);
}

TEST_CASE("5 Hz ripple does not add respiration peaks") {
    const double rate = 25.0;
    std::vector<double> x;
    for (std::size_t i = 0; i <= (std::size_t)(15.0 * rate); ++i) {
        const double t = (double)i / rate;
        x.push_back(std::sin(2.0 * std::numbers::pi * 0.2 * t) +
                    0.08 * std::sin(2.0 * std::numbers::pi * 5.0 * t));
    }
    const auto peaks = detect_resp_peaks(make_channel(ChannelKind::RESP, rate, x));
    REQUIRE(peaks.size() == 3);
}

// ── decompose_gsr ────────────────────────────────────────────────────

TEST_CASE("constant GSR decomposes to tonic == input, phasic == 0") {
    const auto comps =
        decompose_gsr(make_channel(ChannelKind::GSR, 25.0, std::vector<double>(500, 5.25)));
    for (double v : comps.tonic) REQUIRE(v == 5.25);
    for (double v : comps.phasic) REQUIRE(v == 0.0);
}

TEST_CASE("tonic + phasic reconstructs the input exactly") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd(5.0, 1.0);
    std::vector<double> x;
    for (int i = 0; i < 1000; ++i) x.push_back(nd(rng));
    const auto ch = make_channel(ChannelKind::GSR, 25.0, x);
    const auto comps = decompose_gsr(ch);
    for (std::size_t i = 0; i < x.size(); ++i)
        REQUIRE(comps.tonic[i] + comps.phasic[i] == x[i]);
}

TEST_CASE("a fast pulse lands in the phasic component") {
    const double rate = 25.0;
    const double dur = 60.0;
    std::vector<double> ramp, with_pulse, pulse;
    for (std::size_t i = 0; i <= (std::size_t)(dur * rate); ++i) {
        const double t = (double)i / rate;
        const double r = t / dur;
        const double p = t >= 30.0
                             ? std::exp(-(t - 30.0) / 0.25) - std::exp(-(t - 30.0) / 0.05)
                             : 0.0;
        ramp.push_back(r);
        pulse.push_back(p);
        with_pulse.push_back(r + p);
    }
    const auto a = decompose_gsr(make_channel(ChannelKind::GSR, rate, ramp));
    const auto b = decompose_gsr(make_channel(ChannelKind::GSR, rate, with_pulse));
    double pulse_energy = 0.0, phasic_energy = 0.0;
    for (std::size_t i = 0; i < pulse.size(); ++i) {
        pulse_energy += pulse[i] * pulse[i];
        const double d = b.phasic[i] - a.phasic[i];
        phasic_energy += d * d;
    }
    REQUIRE(phasic_energy >= 0.9 * pulse_energy);
}

TEST_CASE("a 0.5 Hz sinusoid is almost entirely phasic") {
    const double rate = 25.0;
    std::vector<double> x;
    for (std::size_t i = 0; i <= (std::size_t)(60.0 * rate); ++i)
        x.push_back(std::sin(2.0 * std::numbers::pi * 0.5 * (double)i / rate));
    const auto comps = decompose_gsr(make_channel(ChannelKind::GSR, rate, x));
    const double var_in = population_std(x) * population_std(x);
    const double var_ph = population_std(comps.phasic) * population_std(comps.phasic);
    REQUIRE(var_ph >= 0.95 * var_in);
}

TEST_CASE("decomposition is linear") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd(4.0, 0.8);
    std::vector<double> x, x2, x37;
    for (int i = 0; i < 800; ++i) {
        const double v = nd(rng) + (i > 400 ? 0.5 : 0.0);
        x.push_back(v);
        x2.push_back(2.0 * v);
        x37.push_back(3.7 * v);
    }
    const auto a = decompose_gsr(make_channel(ChannelKind::GSR, 25.0, x));
    const auto b = decompose_gsr(make_channel(ChannelKind::GSR, 25.0, x2));
    const auto c = decompose_gsr(make_channel(ChannelKind::GSR, 25.0, x37));
    for (std::size_t i = 0; i < x.size(); ++i) {
        // power-of-two scaling commutes with every arithmetic step exactly
        REQUIRE(b.tonic[i] == 2.0 * a.tonic[i]);
        REQUIRE(b.phasic[i] == 2.0 * a.phasic[i]);
        REQUIRE(c.tonic[i] == Catch::Approx(3.7 * a.tonic[i]).epsilon(1e-9).margin(1e-9));
    }
}

TEST_CASE("short GSR input throws") {
    REQUIRE_THROWS_AS(decompose_gsr(make_channel(ChannelKind::GSR, 25.0,
                                                 std::vector<double>(250, 1.0))),
                      TooShort);
}

// ── clean_gaze ───────────────────────────────────────────────────────

namespace {

std::vector<GazeSample> grid_gaze(double duration, double rate, double x, double y) {
    std::vector<GazeSample> g;
    for (std::size_t i = 0; i <= (std::size_t)(duration * rate); ++i)
        g.push_back({(double)i / rate, x, y, true});
    return g;
}

}  // namespace

TEST_CASE("all-valid centred gaze keeps everything") {
    const auto gaze = grid_gaze(10.0, 60.0, 960.0, 540.0);
    const auto track = clean_gaze(gaze, {1920, 1080});
    REQUIRE(track.samples.size() == gaze.size());
    REQUIRE(track.blinks.empty());
    REQUIRE(track.offscreen.empty());
}

TEST_CASE("a 200 ms invalid gap becomes exactly one blink") {
    auto gaze = grid_gaze(10.0, 60.0, 960.0, 540.0);
    // 12 samples at 60 Hz = 200 ms
    for (std::size_t i = 120; i < 132; ++i) gaze[i].valid = false;
    const auto track = clean_gaze(gaze, {1920, 1080});
    REQUIRE(track.blinks.size() == 1);
    REQUIRE(track.offscreen.empty());
    REQUIRE(track.blinks[0].duration() == Catch::Approx(0.2).margin(0.001));
    REQUIRE(track.samples.size() == gaze.size() - 12);
}

TEST_CASE("a 2 s out-of-bounds run becomes one offscreen interval") {
    auto gaze = grid_gaze(10.0, 60.0, 960.0, 540.0);
    for (std::size_t i = 300; i < 420; ++i) gaze[i].x = 2500.0;  // x > width
    const auto track = clean_gaze(gaze, {1920, 1080});
    REQUIRE(track.blinks.empty());
    REQUIRE(track.offscreen.size() == 1);
    REQUIRE(track.offscreen[0].duration() == Catch::Approx(2.0).margin(0.001));
}

TEST_CASE("a 600 ms invalid run counts as offscreen, not a blink") {
    auto gaze = grid_gaze(10.0, 60.0, 960.0, 540.0);
    for (std::size_t i = 60; i < 96; ++i) gaze[i].valid = false;  // 36 samples = 600 ms
    const auto track = clean_gaze(gaze, {1920, 1080});
    REQUIRE(track.blinks.empty());
    REQUIRE(track.offscreen.size() == 1);
}

TEST_CASE("single-sample flicker is silently discarded") {
    auto gaze = grid_gaze(10.0, 60.0, 960.0, 540.0);
    gaze[200].valid = false;
    const auto track = clean_gaze(gaze, {1920, 1080});
    REQUIRE(track.blinks.empty());
    REQUIRE(track.offscreen.empty());
    REQUIRE(track.samples.size() == gaze.size() - 1);
}

TEST_CASE("empty gaze input gives an empty track") {
    const auto track = clean_gaze({}, {1920, 1080});
    REQUIRE(track.samples.empty());
    REQUIRE(track.blinks.empty());
    REQUIRE(track.offscreen.empty());
}

TEST_CASE("every sample lands in exactly one bucket") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<GazeSample> gaze;
    double t = 0.0;
    for (int i = 0; i < 4000; ++i) {
        GazeSample g;
        g.t = t;
        t += 1.0 / 60.0;
        const double r = u(rng);
        if (r < 0.06) {
            g.valid = false;
        } else if (r < 0.10) {
            g.valid = true;
            g.x = 2000.0 + 500.0 * u(rng);
            g.y = 500.0;
        } else {
            g.valid = true;
            g.x = 1900.0 * u(rng);
            g.y = 1070.0 * u(rng);
        }
        gaze.push_back(g);
    }
    const auto track = clean_gaze(gaze, {1920, 1080});

    std::size_t kept = 0, in_blink = 0, in_off = 0, discarded = 0;
    std::size_t si = 0;
    for (const auto& g : gaze) {
        const bool is_kept = si < track.samples.size() && track.samples[si].t == g.t;
        if (is_kept) ++si;
        bool blink = false, off = false;
        for (const auto& b : track.blinks)
            if (g.t >= b.start && g.t < b.end) blink = true;
        for (const auto& o : track.offscreen)
            if (g.t >= o.start && g.t < o.end) off = true;
        const int buckets = (int)is_kept + (int)blink + (int)off;
        REQUIRE(buckets <= 1);
        if (is_kept) ++kept;
        else if (blink) ++in_blink;
        else if (off) ++in_off;
        else ++discarded;
    }
    REQUIRE(si == track.samples.size());
    REQUIRE(kept + in_blink + in_off + discarded == gaze.size());
    REQUIRE(in_off > 0);
}

// session_io.hpp — on-disk session format.
//
// One directory per session:
//   manifest.json        player id, screen size, channel list, file names
//   ecg.csv / resp.csv / gsr.csv   columns t,value
//   gaze.csv             columns t,x,y,valid
//   labels.csv           columns start,end,label
//   truth.csv (optional) generator ground truth, columns kind,t
//
// All numbers are written with shortest round-trip formatting, so
// save -> load -> save is byte-stable and loads reproduce the exact
// doubles that were saved.

#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cogrec/types.hpp"
#include "cogrec/util.hpp"

namespace cogrec {

namespace detail {

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot create " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

inline double parse_double_or_throw(const std::string& field, const std::filesystem::path& file,
                                    std::size_t row) {
    double v;
    if (!parse_double(trim(field), v))
        throw IoError("bad number '" + field + "' in " + file.string() + " row " +
                      std::to_string(row));
    return v;
}

}  // namespace detail

inline std::string channel_file_name(ChannelKind k) {
    switch (k) {
        case ChannelKind::ECG: return "ecg.csv";
        case ChannelKind::RESP: return "resp.csv";
        case ChannelKind::GSR: return "gsr.csv";
    }
    return "";
}

// ── Saving ───────────────────────────────────────────────────────────

inline void save_session(const RecordingSession& session, const std::filesystem::path& dir) {
    session.validate();
    std::filesystem::create_directories(dir);

    nlohmann::json manifest;
    manifest["format_version"] = 1;
    manifest["player_id"] = session.player_id;
    manifest["screen"] = {{"width_px", session.screen.width_px},
                          {"height_px", session.screen.height_px}};
    nlohmann::json chans = nlohmann::json::array();
    for (const auto& c : session.channels) {
        chans.push_back({{"name", std::string(channel_name(c.kind))},
                         {"sample_rate", c.sample_rate},
                         {"start_time", c.start_time},
                         {"file", channel_file_name(c.kind)}});
    }
    manifest["channels"] = chans;
    manifest["gaze_file"] = "gaze.csv";
    manifest["labels_file"] = "labels.csv";
    if (!session.truth.empty()) manifest["truth_file"] = "truth.csv";
    detail::write_text(dir / "manifest.json", manifest.dump(2) + "\n");

    for (const auto& c : session.channels) {
        std::string body = "t,value\n";
        body.reserve(c.samples.size() * 24 + 16);
        for (std::size_t i = 0; i < c.samples.size(); ++i) {
            body += format_double(c.time_at(i));
            body += ',';
            body += format_double(c.samples[i]);
            body += '\n';
        }
        detail::write_text(dir / channel_file_name(c.kind), body);
    }

    {
        std::string body = "t,x,y,valid\n";
        body.reserve(session.gaze.size() * 40 + 16);
        for (const auto& g : session.gaze) {
            body += format_double(g.t);
            body += ',';
            body += format_double(g.x);
            body += ',';
            body += format_double(g.y);
            body += ',';
            body += g.valid ? '1' : '0';
            body += '\n';
        }
        detail::write_text(dir / "gaze.csv", body);
    }

    {
        std::string body = "start,end,label\n";
        for (const auto& iv : session.labels.intervals) {
            body += format_double(iv.start);
            body += ',';
            body += format_double(iv.end);
            body += ',';
            body += std::string(label_name(iv.label));
            body += '\n';
        }
        detail::write_text(dir / "labels.csv", body);
    }

    if (!session.truth.empty()) {
        std::string body = "kind,t\n";
        for (double t : session.truth.ecg_beat_times)
            body += "ecg_beat," + format_double(t) + "\n";
        for (double t : session.truth.resp_peak_times)
            body += "resp_peak," + format_double(t) + "\n";
        detail::write_text(dir / "truth.csv", body);
    }
}

// ── Loading ──────────────────────────────────────────────────────────

inline RecordingSession load_session(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    std::ifstream mf(manifest_path);
    if (!mf) throw IoError("cannot open " + manifest_path.string());
    nlohmann::json manifest;
    try {
        mf >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad manifest " + manifest_path.string() + ": " + e.what());
    }

    RecordingSession s;
    s.player_id = manifest.at("player_id").get<std::string>();
    s.screen.width_px = manifest.at("screen").at("width_px").get<int>();
    s.screen.height_px = manifest.at("screen").at("height_px").get<int>();

    std::map<ChannelKind, bool> seen;
    for (const auto& jc : manifest.at("channels")) {
        const auto name = jc.at("name").get<std::string>();
        const auto kind = channel_from_name(name);
        if (!kind) throw IoError("unknown channel '" + name + "' in " + manifest_path.string());
        const auto file = dir / jc.at("file").get<std::string>();
        if (!std::filesystem::exists(file))
            throw MissingChannel("channel " + name + " listed in manifest but file " +
                                 file.string() + " is absent");
        Channel c;
        c.kind = *kind;
        c.sample_rate = jc.at("sample_rate").get<double>();
        c.start_time = jc.at("start_time").get<double>();
        if (c.sample_rate <= 0.0)
            throw IoError("channel " + name + " has non-positive sample rate");

        const auto lines = detail::read_lines(file);
        if (lines.empty() || lines[0] != "t,value")
            throw IoError("missing 't,value' header in " + file.string());
        c.samples.reserve(lines.size());
        const double dt = 1.0 / c.sample_rate;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            if (lines[i].empty()) continue;
            const auto fields = split_csv_line(lines[i]);
            if (fields.size() != 2)
                throw IoError("expected 2 columns in " + file.string() + " row " +
                              std::to_string(i));
            const double t = detail::parse_double_or_throw(fields[0], file, i);
            const double v = detail::parse_double_or_throw(fields[1], file, i);
            if (std::isnan(v))
                throw NaNSample(name + " sample in " + file.string() + " row " +
                                std::to_string(i) + " is NaN");
            const std::size_t idx = c.samples.size();
            const double expected = c.start_time + static_cast<double>(idx) * dt;
            if (std::abs(t - expected) > dt * 1e-6 + 1e-9)
                throw NonUniformSampling(name + " timestamps deviate from uniform grid in " +
                                         file.string() + " row " + std::to_string(i));
            c.samples.push_back(v);
        }
        if (c.samples.empty()) throw IoError("channel file " + file.string() + " has no samples");
        s.channels[static_cast<std::size_t>(*kind)] = std::move(c);
        seen[*kind] = true;
    }
    for (int k = 0; k < 3; ++k)
        if (!seen[static_cast<ChannelKind>(k)])
            throw MissingChannel("manifest " + manifest_path.string() + " lists no " +
                                 std::string(kChannelNames[static_cast<std::size_t>(k)]) +
                                 " channel");

    {
        const auto file = dir / manifest.at("gaze_file").get<std::string>();
        const auto lines = detail::read_lines(file);
        if (lines.empty() || lines[0] != "t,x,y,valid")
            throw IoError("missing 't,x,y,valid' header in " + file.string());
        for (std::size_t i = 1; i < lines.size(); ++i) {
            if (lines[i].empty()) continue;
            const auto fields = split_csv_line(lines[i]);
            if (fields.size() != 4)
                throw IoError("expected 4 columns in " + file.string() + " row " +
                              std::to_string(i));
            GazeSample g;
            g.t = detail::parse_double_or_throw(fields[0], file, i);
            g.x = detail::parse_double_or_throw(fields[1], file, i);
            g.y = detail::parse_double_or_throw(fields[2], file, i);
            const std::string v = trim(fields[3]);
            if (v != "0" && v != "1")
                throw IoError("bad valid flag '" + v + "' in " + file.string() + " row " +
                              std::to_string(i));
            g.valid = v == "1";
            s.gaze.push_back(g);
        }
    }

    {
        const auto file = dir / manifest.at("labels_file").get<std::string>();
        const auto lines = detail::read_lines(file);
        if (lines.empty() || lines[0] != "start,end,label")
            throw IoError("missing 'start,end,label' header in " + file.string());
        for (std::size_t i = 1; i < lines.size(); ++i) {
            if (lines[i].empty()) continue;
            const auto fields = split_csv_line(lines[i]);
            if (fields.size() != 3)
                throw IoError("expected 3 columns in " + file.string() + " row " +
                              std::to_string(i));
            LabelInterval iv;
            iv.start = detail::parse_double_or_throw(fields[0], file, i);
            iv.end = detail::parse_double_or_throw(fields[1], file, i);
            const auto label = label_from_name(trim(fields[2]));
            if (!label)
                throw IoError("unknown label '" + fields[2] + "' in " + file.string() +
                              " row " + std::to_string(i));
            iv.label = *label;
            s.labels.intervals.push_back(iv);
        }
        try {
            s.labels.validate();
        } catch (const OverlappingLabels& e) {
            throw OverlappingLabels(std::string(e.what()) + " in " + file.string());
        }
    }

    if (manifest.contains("truth_file")) {
        const auto file = dir / manifest.at("truth_file").get<std::string>();
        const auto lines = detail::read_lines(file);
        if (lines.empty() || lines[0] != "kind,t")
            throw IoError("missing 'kind,t' header in " + file.string());
        for (std::size_t i = 1; i < lines.size(); ++i) {
            if (lines[i].empty()) continue;
            const auto fields = split_csv_line(lines[i]);
            if (fields.size() != 2)
                throw IoError("expected 2 columns in " + file.string() + " row " +
                              std::to_string(i));
            const double t = detail::parse_double_or_throw(fields[1], file, i);
            if (fields[0] == "ecg_beat")
                s.truth.ecg_beat_times.push_back(t);
            else if (fields[0] == "resp_peak")
                s.truth.resp_peak_times.push_back(t);
            else
                throw IoError("unknown truth kind '" + fields[0] + "' in " + file.string());
        }
    }

    s.validate();
    return s;
}

// ── Corpus directories ───────────────────────────────────────────────
// A corpus is a directory of session subdirectories (anything holding a
// manifest.json). Sessions are ordered by player id.

inline void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& s : corpus) save_session(s, dir / ("session_" + s.player_id));
}

inline std::vector<std::filesystem::path> list_session_dirs(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw IoError("corpus directory " + dir.string() + " does not exist");
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_directory() && std::filesystem::exists(entry.path() / "manifest.json"))
            out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

inline Corpus load_corpus(const std::filesystem::path& dir) {
    Corpus corpus;
    for (const auto& p : list_session_dirs(dir)) corpus.push_back(load_session(p));
    std::sort(corpus.begin(), corpus.end(),
              [](const RecordingSession& a, const RecordingSession& b) {
                  return a.player_id < b.player_id;
              });
    for (std::size_t i = 1; i < corpus.size(); ++i)
        if (corpus[i].player_id == corpus[i - 1].player_id)
            throw Error("duplicate player_id '" + corpus[i].player_id + "' in corpus");
    return corpus;
}

}  // namespace cogrec

// SPDX-License-Identifier: Apache-2.0

#include "ucmc/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ucmc {

namespace {

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

double parse_double(const std::string& raw, int line, const char* what) {
    const std::string s = strip(raw);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError(std::string("bad ") + what + " '" + s + "'", line);
    }
    return value;
}

int parse_int(const std::string& raw, int line, const char* what) {
    const std::string s = strip(raw);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError(std::string("bad ") + what + " '" + s + "'", line);
    }
    return value;
}

// `label: v1 v2 ...` with '#' comments; returns false for blank lines.
bool labeled_row(const std::string& line, std::string& label, std::vector<double>& values,
                 int line_no) {
    std::string body = line;
    if (const auto hash = body.find('#'); hash != std::string::npos) body.resize(hash);
    body = strip(body);
    if (body.empty()) return false;
    const auto colon = body.find(':');
    if (colon == std::string::npos) throw ParseError("expected 'label: values'", line_no);
    label = strip(body.substr(0, colon));
    values.clear();
    std::istringstream ss(body.substr(colon + 1));
    std::string tok;
    while (ss >> tok) values.push_back(parse_double(tok, line_no, "number"));
    return true;
}

}  // namespace

std::map<int, std::vector<Detection>> parse_detections(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    std::map<int, std::vector<Detection>> by_frame;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() < 7 || fields.size() > 10) {
            throw ParseError("expected 7-10 comma-separated fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        Detection d;
        d.frame = parse_int(fields[0], line_no, "frame");
        if (d.frame < 1) throw ParseError("frame index must be >= 1", line_no);
        parse_int(fields[1], line_no, "id");  // -1 by convention, value unused
        d.bb_left = parse_double(fields[2], line_no, "bb_left");
        d.bb_top = parse_double(fields[3], line_no, "bb_top");
        d.bb_width = parse_double(fields[4], line_no, "bb_width");
        d.bb_height = parse_double(fields[5], line_no, "bb_height");
        d.confidence = parse_double(fields[6], line_no, "conf");
        by_frame[d.frame].push_back(d);
    }
    return by_frame;
}

std::vector<LabeledRow> read_labeled_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<LabeledRow> rows;
    std::string line, label;
    std::vector<double> values;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!labeled_row(line, label, values, line_no)) continue;
        rows.push_back({label, values, line_no});
    }
    return rows;
}

CameraModel parse_camera(const std::filesystem::path& path) {
    bool have_k = false, have_t = false;
    int r_rows = 0;
    CameraIntrinsics intr;
    CameraExtrinsics extr;
    double z0 = 0.0;

    for (const LabeledRow& row : read_labeled_rows(path)) {
        if (row.label == "K") {
            if (row.values.size() != 4) throw ParseError("K row needs fx fy u0 v0", row.line);
            intr = CameraIntrinsics{row.values[0], row.values[1], row.values[2], row.values[3]};
            have_k = true;
        } else if (row.label == "R") {
            if (row.values.size() != 3) throw ParseError("R row needs 3 values", row.line);
            if (r_rows >= 3) throw ParseError("more than three R rows", row.line);
            extr.R.row(r_rows) << row.values[0], row.values[1], row.values[2];
            ++r_rows;
        } else if (row.label == "T") {
            if (row.values.size() != 3) throw ParseError("T row needs tx ty tz", row.line);
            extr.T << row.values[0], row.values[1], row.values[2];
            have_t = true;
        } else if (row.label == "Z0") {
            if (row.values.size() != 1) throw ParseError("Z0 row needs one value", row.line);
            z0 = row.values[0];
        } else {
            throw ParseError("unknown row label '" + row.label + "'", row.line);
        }
    }
    if (!have_k) throw ParseError("missing K row in " + path.string());
    if (r_rows != 3) {
        throw ParseError("missing R row " + std::to_string(r_rows + 1) + " in " + path.string());
    }
    if (!have_t) throw ParseError("missing T row in " + path.string());
    return make_camera(intr, extr, z0);
}

void write_tracks(const std::filesystem::path& path,
                  const std::vector<FrameOutput>& outputs) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());

    struct Row {
        int frame;
        std::int64_t id;
        double l, t, w, h;
    };
    std::vector<Row> rows;
    for (const FrameOutput& fo : outputs)
        for (const auto& b : fo.boxes)
            rows.push_back({fo.frame, b.id, b.bb_left, b.bb_top, b.bb_width, b.bb_height});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.frame, a.id) < std::tie(b.frame, b.id);
    });

    char buf[160];
    for (const Row& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%lld,%.2f,%.2f,%.2f,%.2f,1,-1,-1,-1\n", r.frame,
                      static_cast<long long>(r.id), r.l, r.t, r.w, r.h);
        out << buf;
    }
    if (!out) throw IoError("write failed for " + path.string());
}

void write_detections(const std::filesystem::path& path,
                      const std::map<int, std::vector<Detection>>& by_frame) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    char buf[192];
    for (const auto& [frame, dets] : by_frame) {
        for (const Detection& d : dets) {
            std::snprintf(buf, sizeof buf, "%d,-1,%.2f,%.2f,%.2f,%.2f,%.2f,-1,-1,-1\n", frame,
                          d.bb_left, d.bb_top, d.bb_width, d.bb_height, d.confidence);
            out << buf;
        }
    }
    if (!out) throw IoError("write failed for " + path.string());
}

std::map<int, std::vector<FrameOutput::Box>> parse_track_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::map<int, std::vector<FrameOutput::Box>> by_frame;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        const auto fields = split(line, ',');
        if (fields.size() < 6 || fields.size() > 10) {
            throw ParseError("expected 6-10 comma-separated fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        }
        const int frame = parse_int(fields[0], line_no, "frame");
        if (frame < 1) throw ParseError("frame index must be >= 1", line_no);
        FrameOutput::Box b;
        b.id = parse_int(fields[1], line_no, "id");
        b.bb_left = parse_double(fields[2], line_no, "bb_left");
        b.bb_top = parse_double(fields[3], line_no, "bb_top");
        b.bb_width = parse_double(fields[4], line_no, "bb_width");
        b.bb_height = parse_double(fields[5], line_no, "bb_height");
        by_frame[frame].push_back(b);
    }
    return by_frame;
}

void write_camera(const std::filesystem::path& path, const CameraModel& cam) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    char buf[256];
    std::snprintf(buf, sizeof buf, "K: %.10g %.10g %.10g %.10g\n", cam.intrinsics.fx,
                  cam.intrinsics.fy, cam.intrinsics.u0, cam.intrinsics.v0);
    out << buf;
    for (int r = 0; r < 3; ++r) {
        std::snprintf(buf, sizeof buf, "R: %.17g %.17g %.17g\n", cam.extrinsics.R(r, 0),
                      cam.extrinsics.R(r, 1), cam.extrinsics.R(r, 2));
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "T: %.17g %.17g %.17g\n", cam.extrinsics.T(0),
                  cam.extrinsics.T(1), cam.extrinsics.T(2));
    out << buf;
    std::snprintf(buf, sizeof buf, "Z0: %.10g\n", cam.z0);
    out << buf;
    if (!out) throw IoError("write failed for " + path.string());
}

SeqInfo parse_seqinfo(const std::filesystem::path& path) {
    SeqInfo info;
    std::ifstream in(path);
    if (!in) {
        info.warnings.push_back("seqinfo not found at " + path.string() +
                                "; using fps=" + std::to_string(static_cast<int>(info.fps)));
        return info;
    }
    std::string line;
    int line_no = 0;
    bool have_fps = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string body = strip(line);
        if (body.empty() || body.front() == '[' || body.front() == ';' || body.front() == '#')
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) continue;  // ini noise, tolerated
        const std::string key = strip(body.substr(0, eq));
        const std::string value = strip(body.substr(eq + 1));
        if (key == "name") {
            info.name = value;
        } else if (key == "frameRate") {
            info.fps = parse_double(value, line_no, "frameRate");
            if (!(info.fps > 0.0)) throw ParseError("frameRate must be positive", line_no);
            have_fps = true;
        } else if (key == "imWidth") {
            info.im_width = parse_int(value, line_no, "imWidth");
        } else if (key == "imHeight") {
            info.im_height = parse_int(value, line_no, "imHeight");
        } else if (key == "seqLength") {
            info.seq_length = parse_int(value, line_no, "seqLength");
        }
    }
    if (!have_fps) {
        info.warnings.push_back("seqinfo has no frameRate; using fps=30");
    }
    return info;
}

}  // namespace ucmc

// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ucmc/geometry.hpp"
#include "ucmc/tracker.hpp"

namespace ucmc {

/// Per-sequence metadata in MOT seqinfo.ini style.
struct SeqInfo {
    std::string name;
    double fps = 30.0;
    int im_width = 0;
    int im_height = 0;
    int seq_length = 0;
    std::vector<std::string> warnings;  // soft issues (missing file, no fps)
};

/// Reads a MOT detection file: `frame,id,left,top,w,h,conf[,x,y,z]` with
/// id = -1 by convention. Records come back grouped by frame and in file
/// order within a frame. Throws ParseError with the offending line number.
std::map<int, std::vector<Detection>> parse_detections(const std::filesystem::path& path);

/// Reads the labeled camera-parameter file:
///   K: fx fy u0 v0
///   R: r11 r12 r13        (three rows, row-major world-to-camera rotation)
///   T: tx ty tz
///   Z0: z                 (optional ground height, default 0)
/// `#` starts a comment. The projection is built eagerly, so malformed
/// files and degenerate cameras fail here.
CameraModel parse_camera(const std::filesystem::path& path);

/// Writes tracker output in MOT format, `frame,id,l,t,w,h,1,-1,-1,-1`,
/// floats at two decimals, rows sorted by (frame, id).
void write_tracks(const std::filesystem::path& path,
                  const std::vector<FrameOutput>& outputs);

/// Writes detections in the same format with id = -1 and the confidence in
/// the seventh column. Used by the synthetic generator.
void write_detections(const std::filesystem::path& path,
                      const std::map<int, std::vector<Detection>>& by_frame);

/// Reads seqinfo.ini-style key=value metadata. A missing file or a missing
/// frameRate falls back to defaults with a recorded warning; a malformed
/// value is a ParseError.
SeqInfo parse_seqinfo(const std::filesystem::path& path);

/// Reads a MOT-format file keeping the id column, for ground-truth and
/// track files. Grouped by frame.
std::map<int, std::vector<FrameOutput::Box>> parse_track_file(const std::filesystem::path& path);

/// Writes a camera-parameter file in the parse_camera format.
void write_camera(const std::filesystem::path& path, const CameraModel& cam);

/// One `label: v1 v2 ...` row of a labeled-row text file.
struct LabeledRow {
    std::string label;
    std::vector<double> values;
    int line = 0;
};

/// Reads every labeled row of a file, stripping blanks and '#' comments.
std::vector<LabeledRow> read_labeled_rows(const std::filesystem::path& path);

}  // namespace ucmc

// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "ucmc/association.hpp"
#include "ucmc/geometry.hpp"
#include "ucmc/kalman.hpp"

namespace ucmc {

/// Image-plane detection as parsed from MOT-format input. Confidence is
/// passed through untouched (the format allows values above 1).
struct Detection {
    int frame = 0;
    double bb_left = 0.0;
    double bb_top = 0.0;
    double bb_width = 0.0;
    double bb_height = 0.0;
    double confidence = 0.0;

    /// Ground-contact observation: midpoint of the bottom edge.
    ImagePoint bottom_center() const {
        return ImagePoint{bb_left + bb_width / 2.0, bb_top + bb_height};
    }
};

struct Track {
    std::int64_t id = 0;
    KalmanState state;
    int miss_time = 0;      // frames since last association
    int age = 0;            // total frames alive
    int hits = 0;           // total associations
    double box_w = 0.0;     // most recent associated box size, pixels
    double box_h = 0.0;
};

struct TrackerConfig {
    double tau = 0.6;          // confidence threshold for new tracks
    int dt_threshold = 30;     // lost time threshold, frames
    double sigma_x = 5.0;      // process compensation factor, x axis
    double sigma_y = 5.0;      // process compensation factor, y axis
    double sigma_m = 0.05;     // detection noise factor
    double gate = 13.3;        // association gate on the normalized distance
    double fps = 30.0;         // drives dt = 1/fps
    bool emit_coasted = false; // also emit predicted-only tracks
    int min_hits = 1;          // associations required before emitting
    int n_threads = 1;         // workers for cost-matrix rows

    double dt() const { return 1.0 / fps; }
    void validate() const;
};

/// Boxes emitted for one frame.
struct FrameOutput {
    int frame = 0;
    struct Box {
        std::int64_t id = 0;
        double bb_left = 0.0;
        double bb_top = 0.0;
        double bb_width = 0.0;
        double bb_height = 0.0;
    };
    std::vector<Box> boxes;
};

/// Counters accumulated across a run.
struct TrackerStats {
    std::int64_t frames = 0;
    std::int64_t tracks_created = 0;
    std::int64_t tracks_deleted = 0;
    std::int64_t dropped_detections = 0;  // invalid boxes + horizon failures
};

/// Places a box of the track's last associated size with its bottom-center
/// at the projected track position. Returns nothing when the track projects
/// degenerately or from behind the camera.
std::optional<FrameOutput::Box> emit_box(const Track& t, const CameraModel& cam);

/// Online ground-plane tracker: per frame it predicts all tracks, maps
/// detections to the ground plane with their correlated covariance, solves
/// the gated assignment, updates matches and manages track lifecycle.
///
/// One instance is single-threaded and stateful; run independent sequences
/// on independent instances.
class Tracker {
public:
    /// Hook replacing the association cost; used by the synthetic harness
    /// to compare distance measures on an otherwise identical pipeline.
    /// Must return the pair cost or +infinity for forbidden.
    using CostOverride = std::function<double(const Track&, const Detection&,
                                              const GroundMeasurement&)>;

    Tracker(CameraModel camera, TrackerConfig config,
            CostOverride cost_override = nullptr);

    /// Runs one frame of the tracking loop. Frames must arrive in strictly
    /// increasing order; gaps are allowed and advance nothing extra (the
    /// caller decides what a frame is).
    FrameOutput step(int frame, const std::vector<Detection>& detections);

    const std::vector<Track>& tracks() const { return tracks_; }
    const TrackerStats& stats() const { return stats_; }
    const TrackerConfig& config() const { return config_; }
    const CameraModel& camera() const { return camera_; }

private:
    CameraModel camera_;
    TrackerConfig config_;
    CostOverride cost_override_;
    std::vector<Track> tracks_;
    std::int64_t next_id_ = 1;
    int last_frame_ = 0;
    TrackerStats stats_;
};

/// Folds Tracker::step over frames 1..n_frames in order. Frames without
/// detections still advance predictions and miss counters. When n_frames is
/// zero the largest detection frame index is used.
std::vector<FrameOutput> run_sequence(
    const std::map<int, std::vector<Detection>>& detections_by_frame,
    const CameraModel& camera, const TrackerConfig& config, int n_frames = 0);

}  // namespace ucmc

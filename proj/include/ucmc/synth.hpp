// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <vector>

#include "ucmc/geometry.hpp"
#include "ucmc/io.hpp"
#include "ucmc/tracker.hpp"

namespace ucmc {

/// One constant-velocity target: ground start, velocity, and its pixel box
/// size at the initial depth (scaled with perspective afterwards).
struct TargetSpec {
    double x0 = 0.0;
    double y0 = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    double box_w = 50.0;
    double box_h = 120.0;
};

/// White angular acceleration of the rendering camera, rad/frame^2, about
/// the camera tilt (x) and yaw (y) axes. Only the rendering side ever sees
/// the perturbed extrinsics; the tracker keeps the nominal camera.
struct JitterSpec {
    double sigma_tilt = 0.0;
    double sigma_yaw = 0.0;

    bool any() const { return sigma_tilt > 0.0 || sigma_yaw > 0.0; }
};

struct Scenario {
    std::vector<TargetSpec> targets;
    int frames = 100;
    double fps = 30.0;
    double sigma_m = 0.05;   // pixel noise factor, Gaussian std = sigma_m * box dim
    double confidence = 0.95;
    int im_width = 1920;
    int im_height = 1080;
    CameraModel camera;      // nominal camera, shared with the tracker
    JitterSpec jitter;
};

/// Ground-plane trajectory samples keyed by frame, for metric computation.
struct GroundTrackPoint {
    std::int64_t id = 0;
    Eigen::Vector2d pos = Eigen::Vector2d::Zero();
};
using GroundTrackSeq = std::map<int, std::vector<GroundTrackPoint>>;

struct SynthResult {
    std::map<int, std::vector<Detection>> detections;
    std::vector<FrameOutput> gt_boxes;  // rendered through the nominal camera
    GroundTrackSeq gt_ground;           // exact ground positions
};

/// Desk-scale tracking metrics over ground-plane distance matching.
struct EvalReport {
    int id_switches = 0;
    double idf1 = 0.0;
    double mota = 0.0;
    double association_accuracy = 0.0;
};

/// Doubly integrates white angular acceleration into a rotation
/// perturbation composed with the nominal extrinsics. Displacement variance
/// grows cubically with the frame count, as for integrated white noise.
class JitterIntegrator {
public:
    explicit JitterIntegrator(const JitterSpec& spec) : spec_(spec) {}

    /// Advances one frame and returns the perturbed extrinsics.
    CameraExtrinsics step(const CameraExtrinsics& nominal, std::mt19937_64& rng);

    double tilt_angle() const { return tilt_.angle; }
    double yaw_angle() const { return yaw_.angle; }

private:
    struct AxisState {
        double angle = 0.0;
        double rate = 0.0;
    };
    void advance(AxisState& s, double sigma, std::mt19937_64& rng);

    JitterSpec spec_;
    AxisState tilt_, yaw_;
};

/// Integrates `frames` jitter steps and returns the final perturbed
/// extrinsics. The spec = 0 case returns the input unchanged.
CameraExtrinsics apply_jitter(const CameraExtrinsics& extr, const JitterSpec& spec,
                              int frames, std::mt19937_64& rng);

/// Renders the scenario into detections and ground truth. Deterministic
/// under the seed. Throws FrustumError when no retry keeps every target
/// visible for at least 90% of the frames.
SynthResult generate(const Scenario& scenario, std::uint64_t seed);

/// Reads a scenario file in the labeled-row style of the camera file:
/// frames/fps/sigma_m/conf/image/jitter/target rows plus the camera rows.
Scenario parse_scenario(const std::filesystem::path& path);

/// Built-in three-target scenario used by tests and as a CLI example.
Scenario default_scenario();

/// IDF1 / MOTA / identity switches with per-frame bipartite matching on
/// ground-plane distance (threshold in meters).
EvalReport evaluate(const GroundTrackSeq& tracks, const GroundTrackSeq& gt,
                    double match_threshold = 1.0);

/// Maps emitted boxes back to ground-plane trajectories through a camera
/// (bottom-center back-projection). Degenerate boxes are skipped.
GroundTrackSeq to_ground_tracks(const std::vector<FrameOutput>& outputs,
                                const CameraModel& cam);
GroundTrackSeq to_ground_tracks(const std::map<int, std::vector<FrameOutput::Box>>& by_frame,
                                const CameraModel& cam);

/// Reference comparator: the same tracker pipeline with the association
/// cost replaced by 1 - IoU between the predicted track box and the
/// detection box, gated at IoU >= 0.1. Exists to reproduce the
/// no-box-overlap failure mode of image-plane association.
Tracker make_iou_baseline_tracker(const CameraModel& cam, TrackerConfig config);

/// Intersection-over-union of two image boxes given as (left, top, w, h).
double box_iou(double l1, double t1, double w1, double h1,
               double l2, double t2, double w2, double h2);

}  // namespace ucmc

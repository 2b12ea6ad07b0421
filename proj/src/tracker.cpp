// SPDX-License-Identifier: Apache-2.0

#include "ucmc/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ucmc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBehindCameraTol = 1e-12;
}  // namespace

void TrackerConfig::validate() const {
    if (!(tau >= 0.0 && tau <= 1.0)) throw Error("tau must be in [0, 1]");
    if (dt_threshold < 1) throw Error("dt_threshold must be at least 1");
    if (sigma_x < 0.0 || sigma_y < 0.0) throw Error("compensation factors must be non-negative");
    if (!(sigma_m > 0.0)) throw Error("sigma_m must be positive");
    if (!(fps > 0.0)) throw Error("fps must be positive");
    if (min_hits < 1) throw Error("min_hits must be at least 1");
    if (n_threads < 1) throw Error("n_threads must be at least 1");
}

std::optional<FrameOutput::Box> emit_box(const Track& t, const CameraModel& cam) {
    GroundPoint g;
    g.x = t.state.x_hat(0);
    g.y = t.state.x_hat(2);
    double w3 = 0.0;
    ImagePoint p;
    try {
        p = ground_to_image(g, cam.projection, w3);
    } catch (const PointAtInfinity&) {
        return std::nullopt;
    }
    if (w3 <= kBehindCameraTol) return std::nullopt;  // behind the camera
    FrameOutput::Box box;
    box.id = t.id;
    box.bb_width = t.box_w;
    box.bb_height = t.box_h;
    box.bb_left = p.u - t.box_w / 2.0;
    box.bb_top = p.v - t.box_h;
    return box;
}

Tracker::Tracker(CameraModel camera, TrackerConfig config, CostOverride cost_override)
    : camera_(std::move(camera)),
      config_(config),
      cost_override_(std::move(cost_override)) {
    config_.validate();
}

FrameOutput Tracker::step(int frame, const std::vector<Detection>& detections) {
    if (frame <= last_frame_) {
        throw FrameOrderError("frame " + std::to_string(frame) +
                              " arrived after frame " + std::to_string(last_frame_));
    }
    last_frame_ = frame;
    ++stats_.frames;

    const ProcessNoiseParams noise{config_.sigma_x, config_.sigma_y, config_.dt()};
    for (Track& t : tracks_) {
        t.state = predict(t.state, noise);
        ++t.age;
    }

    // Map usable detections to the ground plane; drop the rest with a count.
    std::vector<const Detection*> dets;
    std::vector<GroundMeasurement> measurements;
    dets.reserve(detections.size());
    measurements.reserve(detections.size());
    for (const Detection& d : detections) {
        if (d.frame != frame) {
            throw FrameOrderError("detection for frame " + std::to_string(d.frame) +
                                  " fed into frame " + std::to_string(frame));
        }
        if (!(d.bb_width > 0.0) || !(d.bb_height > 0.0)) {
            ++stats_.dropped_detections;
            continue;
        }
        try {
            measurements.push_back(map_measurement(d.bottom_center(), d.bb_width,
                                                   d.bb_height, camera_.projection,
                                                   config_.sigma_m));
            dets.push_back(&d);
        } catch (const PointAtInfinity&) {
            ++stats_.dropped_detections;
        }
    }

    CostMatrix cm;
    if (cost_override_) {
        cm.gate = config_.gate;
        cm.cost.resize(static_cast<int>(tracks_.size()), static_cast<int>(dets.size()));
        for (size_t i = 0; i < tracks_.size(); ++i)
            for (size_t j = 0; j < dets.size(); ++j) {
                const double d = cost_override_(tracks_[i], *dets[j], measurements[j]);
                cm.cost(i, j) = (d > config_.gate) ? kInf : d;
            }
    } else {
        std::vector<KalmanState> states(tracks_.size());
        for (size_t i = 0; i < tracks_.size(); ++i) states[i] = tracks_[i].state;
        cm = build_cost_matrix(states, measurements, config_.gate, config_.n_threads);
    }
    const AssignmentResult assignment = solve_assignment(cm);

    // After this block miss_time == 0 marks exactly the tracks associated
    // (or created) this frame.
    std::vector<char> matched_track(tracks_.size(), 0);
    for (const auto& [ti, dj] : assignment.matches) {
        Track& t = tracks_[ti];
        t.state = update(t.state, measurements[dj]);
        t.miss_time = 0;
        ++t.hits;
        t.box_w = dets[dj]->bb_width;
        t.box_h = dets[dj]->bb_height;
        matched_track[ti] = 1;
    }
    for (size_t i = 0; i < tracks_.size(); ++i) {
        if (!matched_track[i]) ++tracks_[i].miss_time;
    }

    std::vector<Track> alive;
    alive.reserve(tracks_.size() + assignment.unmatched_dets.size());
    for (Track& t : tracks_) {
        if (t.miss_time > config_.dt_threshold) {
            ++stats_.tracks_deleted;
        } else {
            alive.push_back(std::move(t));
        }
    }
    tracks_ = std::move(alive);

    for (int dj : assignment.unmatched_dets) {
        if (dets[dj]->confidence < config_.tau) continue;
        Track t;
        t.id = next_id_++;
        t.state = init_state(measurements[dj]);
        t.miss_time = 0;
        t.age = 1;
        t.hits = 1;
        t.box_w = dets[dj]->bb_width;
        t.box_h = dets[dj]->bb_height;
        tracks_.push_back(std::move(t));
        ++stats_.tracks_created;
    }

    FrameOutput out;
    out.frame = frame;
    for (const Track& t : tracks_) {
        const bool emit = (t.miss_time == 0 && t.hits >= config_.min_hits) ||
                          (config_.emit_coasted && t.miss_time > 0);
        if (!emit) continue;
        if (auto box = emit_box(t, camera_)) out.boxes.push_back(*box);
    }
    return out;
}

std::vector<FrameOutput> run_sequence(
    const std::map<int, std::vector<Detection>>& detections_by_frame,
    const CameraModel& camera, const TrackerConfig& config, int n_frames) {
    if (n_frames <= 0) {
        n_frames = detections_by_frame.empty() ? 0 : detections_by_frame.rbegin()->first;
    }
    Tracker tracker(camera, config);
    std::vector<FrameOutput> outputs;
    outputs.reserve(n_frames);
    static const std::vector<Detection> kNoDetections;
    for (int f = 1; f <= n_frames; ++f) {
        const auto it = detections_by_frame.find(f);
        const auto& dets = (it == detections_by_frame.end()) ? kNoDetections : it->second;
        outputs.push_back(tracker.step(f, dets));
    }
    return outputs;
}

}  // namespace ucmc

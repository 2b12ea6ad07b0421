// SPDX-License-Identifier: Apache-2.0

#include "ucmc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "ucmc/association.hpp"

namespace ucmc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::Matrix3d rot_x(double a) {
    Eigen::Matrix3d r;
    r << 1, 0, 0,
         0, std::cos(a), -std::sin(a),
         0, std::sin(a), std::cos(a);
    return r;
}

Eigen::Matrix3d rot_y(double a) {
    Eigen::Matrix3d r;
    r << std::cos(a), 0, std::sin(a),
         0, 1, 0,
         -std::sin(a), 0, std::cos(a);
    return r;
}

}  // namespace

void JitterIntegrator::advance(AxisState& s, double sigma, std::mt19937_64& rng) {
    if (sigma <= 0.0) return;
    std::normal_distribution<double> n(0.0, sigma);
    const double accel = n(rng);  // rad/frame^2, dt = 1 frame
    s.angle += s.rate + 0.5 * accel;
    s.rate += accel;
}

CameraExtrinsics JitterIntegrator::step(const CameraExtrinsics& nominal,
                                        std::mt19937_64& rng) {
    advance(tilt_, spec_.sigma_tilt, rng);
    advance(yaw_, spec_.sigma_yaw, rng);
    // Perturbation about the camera's own tilt (x) and yaw (y) axes,
    // composed from exact rotations so orthonormality is preserved.
    const Eigen::Matrix3d delta = rot_x(tilt_.angle) * rot_y(yaw_.angle);
    CameraExtrinsics out;
    out.R = delta * nominal.R;
    out.T = delta * nominal.T;
    return out;
}

CameraExtrinsics apply_jitter(const CameraExtrinsics& extr, const JitterSpec& spec,
                              int frames, std::mt19937_64& rng) {
    if (!spec.any()) return extr;
    JitterIntegrator integrator(spec);
    CameraExtrinsics out = extr;
    for (int k = 0; k < frames; ++k) out = integrator.step(extr, rng);
    return out;
}

SynthResult generate(const Scenario& scenario, std::uint64_t seed) {
    if (scenario.frames < 1) throw Error("scenario needs at least one frame");
    if (!(scenario.fps > 0.0)) throw Error("scenario fps must be positive");

    const ProjectionMatrix& nominal = scenario.camera.projection;
    const int n_targets = static_cast<int>(scenario.targets.size());

    // Reference scale per target: gamma at its initial position fixes the
    // pixel box size there; later sizes scale inversely with gamma.
    std::vector<double> gamma0(n_targets);
    for (int i = 0; i < n_targets; ++i) {
        const TargetSpec& t = scenario.targets[i];
        double w3 = 0.0;
        ground_to_image(GroundPoint{t.x0, t.y0, 1.0}, nominal, w3);
        if (w3 <= 0.0) throw FrustumError("target starts behind the camera");
        gamma0[i] = w3;
    }

    const double dt = 1.0 / scenario.fps;
    constexpr int kMaxAttempts = 100;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(attempt));
        std::normal_distribution<double> unit(0.0, 1.0);
        JitterIntegrator jitter(scenario.jitter);

        SynthResult result;
        std::vector<int> visible(n_targets, 0);

        for (int frame = 1; frame <= scenario.frames; ++frame) {
            ProjectionMatrix render = nominal;
            if (scenario.jitter.any()) {
                const CameraExtrinsics perturbed =
                    jitter.step(scenario.camera.extrinsics, rng);
                render = build_projection(scenario.camera.intrinsics, perturbed,
                                          scenario.camera.z0);
            }

            FrameOutput gt_frame;
            gt_frame.frame = frame;
            for (int i = 0; i < n_targets; ++i) {
                const TargetSpec& t = scenario.targets[i];
                const double time = (frame - 1) * dt;
                const GroundPoint pos{t.x0 + t.vx * time, t.y0 + t.vy * time, 1.0};

                result.gt_ground[frame].push_back(
                    {i + 1, Eigen::Vector2d(pos.x, pos.y)});

                // Ground truth rendered through the nominal camera.
                double w3_gt = 0.0;
                const ImagePoint gt_px = ground_to_image(pos, nominal, w3_gt);
                if (w3_gt > 0.0) {
                    const double s = gamma0[i] / w3_gt;
                    FrameOutput::Box box;
                    box.id = i + 1;
                    box.bb_width = t.box_w * s;
                    box.bb_height = t.box_h * s;
                    box.bb_left = gt_px.u - box.bb_width / 2.0;
                    box.bb_top = gt_px.v - box.bb_height;
                    gt_frame.boxes.push_back(box);
                }

                // Detection rendered through the (possibly jittered) camera.
                double w3 = 0.0;
                ImagePoint px{0.0, 0.0};
                try {
                    px = ground_to_image(pos, render, w3);
                } catch (const PointAtInfinity&) {
                    continue;
                }
                if (w3 <= 0.0) continue;
                const double scale = gamma0[i] / w3;
                const double w_px = t.box_w * scale;
                const double h_px = t.box_h * scale;
                const bool in_view = px.u >= 0.0 && px.u < scenario.im_width &&
                                     px.v >= 0.0 && px.v < scenario.im_height;
                if (in_view) ++visible[i];

                const double u = px.u + scenario.sigma_m * w_px * unit(rng);
                const double v = px.v + scenario.sigma_m * h_px * unit(rng);
                if (!(u >= 0.0 && u < scenario.im_width && v >= 0.0 &&
                      v < scenario.im_height)) {
                    continue;  // a real detector sees nothing off-frame
                }
                Detection d;
                d.frame = frame;
                d.bb_width = w_px;
                d.bb_height = h_px;
                d.bb_left = u - w_px / 2.0;
                d.bb_top = v - h_px;
                d.confidence = scenario.confidence;
                result.detections[frame].push_back(d);
            }
            result.gt_boxes.push_back(std::move(gt_frame));
        }

        const int required = static_cast<int>(std::ceil(0.9 * scenario.frames));
        const bool ok = std::all_of(visible.begin(), visible.end(),
                                    [&](int c) { return c >= required; });
        if (ok) return result;
    }
    throw FrustumError("targets not visible for 90% of frames after " +
                       std::to_string(kMaxAttempts) + " attempts");
}

Scenario parse_scenario(const std::filesystem::path& path) {
    Scenario s;
    s.targets.clear();
    bool have_k = false, have_t = false;
    int r_rows = 0;
    CameraIntrinsics intr;
    CameraExtrinsics extr;
    double z0 = 0.0;

    for (const LabeledRow& row : read_labeled_rows(path)) {
        const auto need = [&](size_t n, const char* what) {
            if (row.values.size() != n)
                throw ParseError(std::string(what) + " row needs " + std::to_string(n) +
                                     " values",
                                 row.line);
        };
        if (row.label == "frames") {
            need(1, "frames");
            s.frames = static_cast<int>(row.values[0]);
        } else if (row.label == "fps") {
            need(1, "fps");
            s.fps = row.values[0];
        } else if (row.label == "sigma_m") {
            need(1, "sigma_m");
            s.sigma_m = row.values[0];
        } else if (row.label == "conf") {
            need(1, "conf");
            s.confidence = row.values[0];
        } else if (row.label == "image") {
            need(2, "image");
            s.im_width = static_cast<int>(row.values[0]);
            s.im_height = static_cast<int>(row.values[1]);
        } else if (row.label == "jitter") {
            need(2, "jitter");
            s.jitter.sigma_tilt = row.values[0];
            s.jitter.sigma_yaw = row.values[1];
        } else if (row.label == "target") {
            need(6, "target");
            s.targets.push_back({row.values[0], row.values[1], row.values[2], row.values[3],
                                 row.values[4], row.values[5]});
        } else if (row.label == "K") {
            need(4, "K");
            intr = CameraIntrinsics{row.values[0], row.values[1], row.values[2], row.values[3]};
            have_k = true;
        } else if (row.label == "R") {
            need(3, "R");
            if (r_rows >= 3) throw ParseError("more than three R rows", row.line);
            extr.R.row(r_rows) << row.values[0], row.values[1], row.values[2];
            ++r_rows;
        } else if (row.label == "T") {
            need(3, "T");
            extr.T << row.values[0], row.values[1], row.values[2];
            have_t = true;
        } else if (row.label == "Z0") {
            need(1, "Z0");
            z0 = row.values[0];
        } else {
            throw ParseError("unknown row label '" + row.label + "'", row.line);
        }
    }
    if (!have_k) throw ParseError("missing K row in " + path.string());
    if (r_rows != 3) throw ParseError("missing R rows in " + path.string());
    if (!have_t) throw ParseError("missing T row in " + path.string());
    s.camera = make_camera(intr, extr, z0);
    if (s.frames < 1) throw ParseError("frames must be >= 1 in " + path.string());
    if (!(s.fps > 0.0)) throw ParseError("fps must be positive in " + path.string());
    return s;
}

Scenario default_scenario() {
    Scenario s;
    s.frames = 100;
    s.fps = 30.0;
    s.sigma_m = 0.05;
    s.im_width = 1920;
    s.im_height = 1080;
    // Camera 5 m above the ground, pitched down 30 degrees, looking along +y.
    const double phi = 30.0 * M_PI / 180.0;
    const double height = 5.0;
    CameraExtrinsics extr;
    extr.R << 1, 0, 0,
              0, -std::sin(phi), -std::cos(phi),
              0, std::cos(phi), -std::sin(phi);
    extr.T << 0.0, height * std::cos(phi), height * std::sin(phi);
    s.camera = make_camera(CameraIntrinsics{1000.0, 1000.0, 960.0, 540.0}, extr, 0.0);
    s.targets = {
        {-5.0, 7.0, 1.0, 0.2, 50.0, 120.0},
        {0.0, 16.0, 0.2, -0.8, 50.0, 120.0},
        {5.0, 9.0, -0.8, 0.5, 50.0, 120.0},
    };
    return s;
}

GroundTrackSeq to_ground_tracks(const std::vector<FrameOutput>& outputs,
                                const CameraModel& cam) {
    GroundTrackSeq seq;
    for (const FrameOutput& fo : outputs) {
        for (const auto& b : fo.boxes) {
            const ImagePoint bc{b.bb_left + b.bb_width / 2.0, b.bb_top + b.bb_height};
            try {
                const GroundPoint g = image_to_ground(bc, cam.projection);
                seq[fo.frame].push_back({b.id, Eigen::Vector2d(g.x, g.y)});
            } catch (const PointAtInfinity&) {
                // unmappable box, useless for ground-plane metrics
            }
        }
    }
    return seq;
}

GroundTrackSeq to_ground_tracks(const std::map<int, std::vector<FrameOutput::Box>>& by_frame,
                                const CameraModel& cam) {
    std::vector<FrameOutput> outputs;
    outputs.reserve(by_frame.size());
    for (const auto& [frame, boxes] : by_frame) {
        FrameOutput fo;
        fo.frame = frame;
        fo.boxes = boxes;
        outputs.push_back(std::move(fo));
    }
    return to_ground_tracks(outputs, cam);
}

EvalReport evaluate(const GroundTrackSeq& tracks, const GroundTrackSeq& gt,
                    double match_threshold) {
    std::set<int> frames;
    for (const auto& [f, _] : gt) frames.insert(f);
    for (const auto& [f, _] : tracks) frames.insert(f);

    static const std::vector<GroundTrackPoint> kEmpty;
    const auto rows_at = [](const GroundTrackSeq& seq, int f) -> const std::vector<GroundTrackPoint>& {
        const auto it = seq.find(f);
        return it == seq.end() ? kEmpty : it->second;
    };

    std::int64_t total_gt = 0, total_trk = 0, fn = 0, fp = 0;
    int idsw = 0;
    std::map<std::int64_t, std::int64_t> last_match;              // gt id -> track id
    std::map<std::pair<std::int64_t, std::int64_t>, int> overlap; // frames in proximity
    std::vector<std::pair<std::int64_t, std::int64_t>> frame_matches;

    for (int f : frames) {
        const auto& g = rows_at(gt, f);
        const auto& t = rows_at(tracks, f);
        total_gt += static_cast<std::int64_t>(g.size());
        total_trk += static_cast<std::int64_t>(t.size());

        for (const auto& gi : g)
            for (const auto& tj : t)
                if ((gi.pos - tj.pos).norm() <= match_threshold)
                    ++overlap[{gi.id, tj.id}];

        CostMatrix cm;
        cm.gate = match_threshold;
        cm.cost.resize(static_cast<int>(g.size()), static_cast<int>(t.size()));
        for (size_t i = 0; i < g.size(); ++i)
            for (size_t j = 0; j < t.size(); ++j) {
                const double d = (g[i].pos - t[j].pos).norm();
                cm.cost(static_cast<int>(i), static_cast<int>(j)) =
                    d <= match_threshold ? d : kInf;
            }
        const AssignmentResult ar = solve_assignment(cm);
        for (const auto& [gi, tj] : ar.matches) {
            const std::int64_t gid = g[gi].id;
            const std::int64_t tid = t[tj].id;
            const auto it = last_match.find(gid);
            if (it != last_match.end() && it->second != tid) ++idsw;
            last_match[gid] = tid;
            frame_matches.emplace_back(gid, tid);
        }
        fn += static_cast<std::int64_t>(g.size()) - static_cast<std::int64_t>(ar.matches.size());
        fp += static_cast<std::int64_t>(t.size()) - static_cast<std::int64_t>(ar.matches.size());
    }

    // Global identity assignment: maximize total in-proximity frames over a
    // padded square problem so identities may also stay unmatched.
    std::vector<std::int64_t> gt_ids, trk_ids;
    for (const auto& [key, _] : overlap) {
        gt_ids.push_back(key.first);
        trk_ids.push_back(key.second);
    }
    std::sort(gt_ids.begin(), gt_ids.end());
    gt_ids.erase(std::unique(gt_ids.begin(), gt_ids.end()), gt_ids.end());
    std::sort(trk_ids.begin(), trk_ids.end());
    trk_ids.erase(std::unique(trk_ids.begin(), trk_ids.end()), trk_ids.end());

    const int ng = static_cast<int>(gt_ids.size());
    const int nt = static_cast<int>(trk_ids.size());
    std::map<std::int64_t, std::int64_t> identity_map;  // gt id -> track id
    std::int64_t idtp = 0;
    if (ng > 0 && nt > 0) {
        CostMatrix cm;
        cm.gate = kInf;
        cm.cost = Eigen::MatrixXd::Constant(ng + nt, nt + ng, kInf);
        for (int i = 0; i < ng; ++i)
            for (int j = 0; j < nt; ++j) {
                const auto it = overlap.find({gt_ids[i], trk_ids[j]});
                if (it != overlap.end()) cm.cost(i, j) = -static_cast<double>(it->second);
            }
        for (int i = 0; i < ng; ++i) cm.cost(i, nt + i) = 0.0;          // gt unmatched
        for (int j = 0; j < nt; ++j) cm.cost(ng + j, j) = 0.0;          // track unmatched
        for (int j = 0; j < nt; ++j)
            for (int i = 0; i < ng; ++i) cm.cost(ng + j, nt + i) = 0.0; // filler
        const AssignmentResult ar = solve_assignment(cm);
        for (const auto& [r, c] : ar.matches) {
            if (r < ng && c < nt) {
                identity_map[gt_ids[r]] = trk_ids[c];
                idtp += overlap.at({gt_ids[r], trk_ids[c]});
            }
        }
    }

    EvalReport report;
    report.id_switches = idsw;
    const std::int64_t denom = total_gt + total_trk;
    report.idf1 = denom > 0 ? 2.0 * static_cast<double>(idtp) / static_cast<double>(denom) : 1.0;
    report.mota = total_gt > 0
                      ? 1.0 - static_cast<double>(fn + fp + idsw) / static_cast<double>(total_gt)
                      : (fp > 0 ? 0.0 : 1.0);
    if (frame_matches.empty()) {
        report.association_accuracy = total_gt > 0 ? 0.0 : 1.0;
    } else {
        std::int64_t consistent = 0;
        for (const auto& [gid, tid] : frame_matches) {
            const auto it = identity_map.find(gid);
            if (it != identity_map.end() && it->second == tid) ++consistent;
        }
        report.association_accuracy =
            static_cast<double>(consistent) / static_cast<double>(frame_matches.size());
    }
    return report;
}

double box_iou(double l1, double t1, double w1, double h1,
               double l2, double t2, double w2, double h2) {
    const double xi = std::max(l1, l2);
    const double yi = std::max(t1, t2);
    const double xa = std::min(l1 + w1, l2 + w2);
    const double ya = std::min(t1 + h1, t2 + h2);
    const double iw = std::max(0.0, xa - xi);
    const double ih = std::max(0.0, ya - yi);
    const double inter = iw * ih;
    const double uni = w1 * h1 + w2 * h2 - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

Tracker make_iou_baseline_tracker(const CameraModel& cam, TrackerConfig config) {
    config.gate = 0.9;  // 1 - IoU, forbidden below IoU 0.1
    const CameraModel cam_copy = cam;
    auto cost = [cam_copy](const Track& t, const Detection& d,
                           const GroundMeasurement&) -> double {
        const auto box = emit_box(t, cam_copy);
        if (!box) return kInf;
        const double iou = box_iou(box->bb_left, box->bb_top, box->bb_width, box->bb_height,
                                   d.bb_left, d.bb_top, d.bb_width, d.bb_height);
        return 1.0 - iou;
    };
    return Tracker(cam, config, cost);
}

}  // namespace ucmc

// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "scenarios.hpp"
#include "test_helpers.hpp"
#include "ucmc/synth.hpp"

using namespace ucmc;
using namespace ucmc::testing;

namespace {

GroundTrackSeq seq_of(std::initializer_list<std::tuple<int, std::int64_t, double, double>> rows) {
    GroundTrackSeq seq;
    for (const auto& [frame, id, x, y] : rows) {
        seq[frame].push_back({id, Eigen::Vector2d(x, y)});
    }
    return seq;
}

}  // namespace

TEST_CASE("generator is deterministic under the seed") {
    const Scenario s = default_scenario();
    const SynthResult a = generate(s, 42);
    const SynthResult b = generate(s, 42);
    REQUIRE(a.detections.size() == b.detections.size());
    for (const auto& [frame, dets] : a.detections) {
        const auto& other = b.detections.at(frame);
        REQUIRE(dets.size() == other.size());
        for (size_t i = 0; i < dets.size(); ++i) {
            CHECK(dets[i].bb_left == other[i].bb_left);
            CHECK(dets[i].bb_top == other[i].bb_top);
            CHECK(dets[i].bb_width == other[i].bb_width);
        }
    }
    const SynthResult c = generate(s, 43);
    bool any_diff = false;
    for (const auto& [frame, dets] : a.detections) {
        const auto& other = c.detections.at(frame);
        for (size_t i = 0; i < std::min(dets.size(), other.size()); ++i)
            if (dets[i].bb_left != other[i].bb_left) any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("static noiseless target renders identically every frame") {
    Scenario s = default_scenario();
    s.targets = {{0.0, 10.0, 0.0, 0.0, 50.0, 120.0}};
    s.sigma_m = 1e-12;  // effectively zero while keeping covariances valid
    s.frames = 20;
    const SynthResult r = generate(s, 1);
    REQUIRE(r.detections.size() == 20);
    const Detection& first = r.detections.at(1)[0];
    for (const auto& [frame, dets] : r.detections) {
        REQUIRE(dets.size() == 1);
        CHECK(dets[0].bb_left == doctest::Approx(first.bb_left).epsilon(1e-9));
        CHECK(dets[0].bb_top == doctest::Approx(first.bb_top).epsilon(1e-9));
    }
}

TEST_CASE("pixel noise statistics match sigma_m") {
    Scenario s = default_scenario();
    s.targets = {{0.0, 10.0, 0.0, 0.0, 50.0, 120.0}};
    s.frames = 10000;
    s.sigma_m = 0.05;
    const SynthResult r = generate(s, 7);

    // true projection of the static target
    double w3 = 0.0;
    const ImagePoint truth = ground_to_image(GroundPoint{0.0, 10.0, 1.0},
                                             s.camera.projection, w3);
    double su = 0.0, sv = 0.0, su2 = 0.0, sv2 = 0.0;
    std::int64_t n = 0;
    double w_px = 0.0, h_px = 0.0;
    for (const auto& [frame, dets] : r.detections) {
        for (const Detection& d : dets) {
            const ImagePoint bc = d.bottom_center();
            su += bc.u - truth.u;
            sv += bc.v - truth.v;
            su2 += (bc.u - truth.u) * (bc.u - truth.u);
            sv2 += (bc.v - truth.v) * (bc.v - truth.v);
            w_px = d.bb_width;
            h_px = d.bb_height;
            ++n;
        }
    }
    REQUIRE(n > 9000);
    const double std_u = std::sqrt(su2 / n - (su / n) * (su / n));
    const double std_v = std::sqrt(sv2 / n - (sv / n) * (sv / n));
    CHECK(std_u == doctest::Approx(s.sigma_m * w_px).epsilon(0.05));
    CHECK(std_v == doctest::Approx(s.sigma_m * h_px).epsilon(0.05));
}

TEST_CASE("generator throws FrustumError for invisible targets") {
    Scenario s = default_scenario();
    s.targets = {{500.0, 10.0, 0.0, 0.0, 50.0, 120.0}};  // far off-frame
    CHECK_THROWS_AS(generate(s, 1), FrustumError);
}

TEST_CASE("apply_jitter zero spec is the identity") {
    std::mt19937_64 rng(3);
    const CameraExtrinsics extr = surveillance_extrinsics(30.0 * M_PI / 180.0, 5.0);
    const CameraExtrinsics out = apply_jitter(extr, JitterSpec{}, 50, rng);
    CHECK(out.R == extr.R);
    CHECK(out.T == extr.T);
}

TEST_CASE("jittered extrinsics stay orthonormal") {
    std::mt19937_64 rng(5);
    const CameraExtrinsics extr = surveillance_extrinsics(30.0 * M_PI / 180.0, 5.0);
    const JitterSpec spec{0.01, 0.02};
    for (int trial = 0; trial < 20; ++trial) {
        const CameraExtrinsics out = apply_jitter(extr, spec, 100, rng);
        CHECK((out.R.transpose() * out.R - Eigen::Matrix3d::Identity())
                  .cwiseAbs()
                  .maxCoeff() < 1e-9);
        CHECK(out.R.determinant() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("jitter displacement variance grows cubically") {
    // var(theta_k) = sigma^2 * (4k^3 - k) / 12 for doubly integrated white
    // acceleration sampled at unit frame steps.
    const double sigma = 0.01;
    const int k1 = 10, k2 = 20;
    const double expected1 = sigma * sigma * (4.0 * k1 * k1 * k1 - k1) / 12.0;
    const double expected2 = sigma * sigma * (4.0 * k2 * k2 * k2 - k2) / 12.0;

    std::mt19937_64 rng(9);
    double v1 = 0.0, v2 = 0.0;
    const int runs = 1000;
    for (int r = 0; r < runs; ++r) {
        JitterIntegrator integ(JitterSpec{0.0, sigma});
        const CameraExtrinsics extr = surveillance_extrinsics(30.0 * M_PI / 180.0, 5.0);
        double at_k1 = 0.0;
        for (int k = 1; k <= k2; ++k) {
            integ.step(extr, rng);
            if (k == k1) at_k1 = integ.yaw_angle();
        }
        v1 += at_k1 * at_k1;
        v2 += integ.yaw_angle() * integ.yaw_angle();
    }
    v1 /= runs;
    v2 /= runs;
    CHECK(v1 == doctest::Approx(expected1).epsilon(0.15));
    CHECK(v2 == doctest::Approx(expected2).epsilon(0.15));
    CHECK(v2 / v1 == doctest::Approx(8.0).epsilon(0.25));
}

TEST_CASE("evaluate perfect output") {
    const auto gt = seq_of({{1, 1, 0.0, 0.0}, {1, 2, 5.0, 0.0},
                            {2, 1, 0.5, 0.0}, {2, 2, 5.5, 0.0}});
    const EvalReport r = evaluate(gt, gt, 1.0);
    CHECK(r.idf1 == doctest::Approx(1.0));
    CHECK(r.mota == doctest::Approx(1.0));
    CHECK(r.id_switches == 0);
    CHECK(r.association_accuracy == doctest::Approx(1.0));
}

TEST_CASE("evaluate empty output") {
    const auto gt = seq_of({{1, 1, 0.0, 0.0}, {2, 1, 0.5, 0.0}, {3, 1, 1.0, 0.0}});
    const EvalReport r = evaluate(GroundTrackSeq{}, gt, 1.0);
    CHECK(r.idf1 == doctest::Approx(0.0));
    CHECK(r.mota == doctest::Approx(0.0));  // all false negatives, no FPs
    CHECK(r.id_switches == 0);
}

TEST_CASE("evaluate hand-built id swap") {
    // One target over three frames; the tracker swaps to a new id at frame 3.
    const auto gt = seq_of({{1, 1, 0.0, 0.0}, {2, 1, 1.0, 0.0}, {3, 1, 2.0, 0.0}});
    const auto trk = seq_of({{1, 1, 0.0, 0.1}, {2, 1, 1.0, 0.1}, {3, 2, 2.0, 0.1}});
    const EvalReport r = evaluate(trk, gt, 1.0);
    CHECK(r.id_switches == 1);
    // By hand: overlap(1->1) = 2, overlap(1->2) = 1; identity map 1->1;
    // IDTP = 2; IDF1 = 2*2 / (3 + 3) = 2/3.
    CHECK(r.idf1 == doctest::Approx(2.0 / 3.0));
    // MOTA: no FP/FN, one switch over three gt boxes.
    CHECK(r.mota == doctest::Approx(1.0 - 1.0 / 3.0));
    CHECK(r.association_accuracy == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("evaluate is invariant to track id relabeling") {
    const auto gt = seq_of({{1, 1, 0.0, 0.0}, {1, 2, 5.0, 0.0},
                            {2, 1, 0.5, 0.0}, {2, 2, 5.5, 0.0},
                            {3, 1, 1.0, 0.0}, {3, 2, 6.0, 0.0}});
    const auto trk = seq_of({{1, 10, 0.0, 0.1}, {1, 20, 5.0, 0.1},
                             {2, 10, 0.5, 0.1}, {2, 20, 5.5, 0.1},
                             {3, 20, 1.0, 0.1}, {3, 10, 6.0, 0.1}});  // swap at 3
    GroundTrackSeq relabeled = trk;
    for (auto& [frame, rows] : relabeled)
        for (auto& row : rows) row.id = row.id == 10 ? 777 : 888;

    const EvalReport a = evaluate(trk, gt, 1.0);
    const EvalReport b = evaluate(relabeled, gt, 1.0);
    CHECK(a.idf1 == doctest::Approx(b.idf1));
    CHECK(a.mota == doctest::Approx(b.mota));
    CHECK(a.id_switches == b.id_switches);
    CHECK(a.id_switches == 2);  // both targets handed over at frame 3
}

TEST_CASE("scenario files round trip through parse_scenario") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "ucmc_synth_test";
    fs::create_directories(dir);
    const fs::path spec_path = dir / "scenario.txt";
    {
        std::ofstream out(spec_path);
        out << "# synthetic scene\n"
               "frames: 50\n"
               "fps: 10\n"
               "sigma_m: 0.04\n"
               "conf: 0.9\n"
               "image: 1280 720\n"
               "jitter: 0.001 0.002\n"
               "target: -2 8 0.5 0.1 40 100\n"
               "target: 2 12 -0.5 0 40 100\n"
               "K: 900 900 640 360\n"
               "R: 1 0 0\n"
               "R: 0 -0.5 -0.8660254037844387\n"
               "R: 0 0.8660254037844387 -0.5\n"
               "T: 0 4.330127018922194 2.5\n"
               "Z0: 0\n";
    }
    const Scenario s = parse_scenario(spec_path);
    CHECK(s.frames == 50);
    CHECK(s.fps == 10.0);
    CHECK(s.sigma_m == 0.04);
    CHECK(s.confidence == 0.9);
    CHECK(s.im_width == 1280);
    CHECK(s.jitter.sigma_yaw == 0.002);
    REQUIRE(s.targets.size() == 2);
    CHECK(s.targets[1].x0 == 2.0);
    CHECK_NOTHROW(generate(s, 3));
    fs::remove_all(dir);
}

TEST_CASE("iou baseline behaves on easy scenes and empty frames") {
    const Scenario s = default_scenario();
    const SynthResult r = generate(s, 11);

    TrackerConfig cfg;
    cfg.fps = s.fps;
    Tracker iou = make_iou_baseline_tracker(s.camera, cfg);
    std::vector<FrameOutput> outputs;
    for (int f = 1; f <= s.frames; ++f) {
        const auto it = r.detections.find(f);
        outputs.push_back(iou.step(f, it == r.detections.end()
                                          ? std::vector<Detection>{}
                                          : it->second));
    }
    const EvalReport report =
        evaluate(to_ground_tracks(outputs, s.camera), r.gt_ground, 1.0);
    CHECK(report.id_switches == 0);
    CHECK(report.idf1 > 0.95);

    Tracker fresh = make_iou_baseline_tracker(s.camera, cfg);
    CHECK(fresh.step(1, {}).boxes.empty());
}

TEST_CASE("clean scene keeps exactly one id per target") {
    const Scenario s = default_scenario();
    const SynthResult r = generate(s, 11);
    TrackerConfig cfg;
    cfg.fps = s.fps;
    Tracker tracker(s.camera, cfg);
    std::set<std::int64_t> ids;
    for (int f = 1; f <= s.frames; ++f) {
        const auto it = r.detections.find(f);
        const FrameOutput out = tracker.step(
            f, it == r.detections.end() ? std::vector<Detection>{} : it->second);
        for (const auto& b : out.boxes) ids.insert(b.id);
    }
    CHECK(ids == std::set<std::int64_t>{1, 2, 3});
}

TEST_CASE("shake scenario: IoU baseline switches identities, MMD does not") {
    const Scenario s = shake_scenario();
    const SynthResult r = generate(s, 0);

    TrackerConfig cfg;
    cfg.fps = s.fps;
    cfg.sigma_x = cfg.sigma_y = 25.0;
    Tracker mmd_tracker(s.camera, cfg);
    Tracker iou_tracker = make_iou_baseline_tracker(s.camera, cfg);

    std::vector<FrameOutput> mmd_out, iou_out;
    static const std::vector<Detection> none;
    for (int f = 1; f <= s.frames; ++f) {
        const auto it = r.detections.find(f);
        const auto& dets = it == r.detections.end() ? none : it->second;
        mmd_out.push_back(mmd_tracker.step(f, dets));
        iou_out.push_back(iou_tracker.step(f, dets));
    }
    const EvalReport mmd_rep =
        evaluate(to_ground_tracks(mmd_out, s.camera), r.gt_ground, kShakeMatchThreshold);
    const EvalReport iou_rep =
        evaluate(to_ground_tracks(iou_out, s.camera), r.gt_ground, kShakeMatchThreshold);
    CHECK(mmd_rep.id_switches == 0);
    CHECK(iou_rep.id_switches >= 1);
    CHECK(mmd_rep.idf1 > iou_rep.idf1);
}

TEST_CASE("box_iou basics") {
    CHECK(box_iou(0, 0, 10, 10, 0, 0, 10, 10) == doctest::Approx(1.0));
    CHECK(box_iou(0, 0, 10, 10, 20, 20, 10, 10) == doctest::Approx(0.0));
    CHECK(box_iou(0, 0, 10, 10, 5, 0, 10, 10) == doctest::Approx(50.0 / 150.0));
}

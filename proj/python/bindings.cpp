// SPDX-License-Identifier: Apache-2.0

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ucmc/association.hpp"
#include "ucmc/geometry.hpp"
#include "ucmc/io.hpp"
#include "ucmc/kalman.hpp"
#include "ucmc/synth.hpp"
#include "ucmc/tracker.hpp"

namespace py = pybind11;
using namespace ucmc;

PYBIND11_MODULE(_ucmctrack, m) {
    m.doc() = "Ground-plane multi-object tracker with mapped Mahalanobis association";

    py::register_exception<SingularProjection>(m, "SingularProjection");
    py::register_exception<PointAtInfinity>(m, "PointAtInfinity");
    py::register_exception<InvalidDimension>(m, "InvalidDimension");
    py::register_exception<DegenerateInnovation>(m, "DegenerateInnovation");
    py::register_exception<ParseError>(m, "ParseError");
    py::register_exception<FrameOrderError>(m, "FrameOrderError");
    py::register_exception<FrustumError>(m, "FrustumError");

    py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
        .def(py::init<double, double, double, double>(), py::arg("fx"), py::arg("fy"),
             py::arg("u0"), py::arg("v0"))
        .def_readwrite("fx", &CameraIntrinsics::fx)
        .def_readwrite("fy", &CameraIntrinsics::fy)
        .def_readwrite("u0", &CameraIntrinsics::u0)
        .def_readwrite("v0", &CameraIntrinsics::v0);

    py::class_<CameraExtrinsics>(m, "CameraExtrinsics")
        .def(py::init<>())
        .def_readwrite("R", &CameraExtrinsics::R)
        .def_readwrite("T", &CameraExtrinsics::T);

    py::class_<CameraModel>(m, "CameraModel")
        .def_readonly("intrinsics", &CameraModel::intrinsics)
        .def_readonly("extrinsics", &CameraModel::extrinsics)
        .def_readonly("z0", &CameraModel::z0)
        .def_property_readonly("A", [](const CameraModel& c) { return c.projection.A; })
        .def_property_readonly("A_inv",
                               [](const CameraModel& c) { return c.projection.A_inv; });

    m.def("make_camera", &make_camera, py::arg("intrinsics"), py::arg("extrinsics"),
          py::arg("z0") = 0.0);
    m.def("load_camera", &parse_camera, py::arg("path"));

    m.def(
        "image_to_ground",
        [](const CameraModel& cam, double u, double v) {
            const GroundPoint g = image_to_ground(ImagePoint{u, v}, cam.projection);
            return py::make_tuple(g.x, g.y, g.gamma);
        },
        py::arg("camera"), py::arg("u"), py::arg("v"),
        "Back-project a pixel onto the ground plane; returns (x, y, gamma).");
    m.def(
        "ground_to_image",
        [](const CameraModel& cam, double x, double y) {
            const ImagePoint p = ground_to_image(GroundPoint{x, y, 1.0}, cam.projection);
            return py::make_tuple(p.u, p.v);
        },
        py::arg("camera"), py::arg("x"), py::arg("y"));
    m.def(
        "map_measurement",
        [](const CameraModel& cam, double u, double v, double w, double h, double sigma_m) {
            const GroundMeasurement g =
                map_measurement(ImagePoint{u, v}, w, h, cam.projection, sigma_m);
            return py::make_tuple(g.position, g.cov);
        },
        py::arg("camera"), py::arg("u"), py::arg("v"), py::arg("w"), py::arg("h"),
        py::arg("sigma_m") = 0.05,
        "Map a bottom-center pixel with box size to (position, covariance).");

    m.def(
        "mmd",
        [](const Eigen::Vector2d& z_pos, const Eigen::Matrix2d& z_cov,
           const Eigen::Vector4d& x_hat, const Eigen::Matrix4d& p) {
            GroundMeasurement z;
            z.position = z_pos;
            z.cov = z_cov;
            KalmanState s;
            s.x_hat = x_hat;
            s.P = p;
            return mmd(z, s);
        },
        py::arg("z_position"), py::arg("z_cov"), py::arg("x_hat"), py::arg("P"),
        "Normalized Mahalanobis distance between a measurement and a state.");

    m.def(
        "solve_assignment",
        [](const Eigen::MatrixXd& cost, double gate) {
            CostMatrix cm;
            cm.cost = cost;
            cm.gate = gate;
            const AssignmentResult r = solve_assignment(cm);
            return py::make_tuple(r.matches, r.unmatched_tracks, r.unmatched_dets);
        },
        py::arg("cost"), py::arg("gate") = std::numeric_limits<double>::infinity(),
        "Min-cost max-cardinality assignment; +inf entries are forbidden.");

    py::class_<TrackerConfig>(m, "TrackerConfig")
        .def(py::init<>())
        .def_readwrite("tau", &TrackerConfig::tau)
        .def_readwrite("dt_threshold", &TrackerConfig::dt_threshold)
        .def_readwrite("sigma_x", &TrackerConfig::sigma_x)
        .def_readwrite("sigma_y", &TrackerConfig::sigma_y)
        .def_readwrite("sigma_m", &TrackerConfig::sigma_m)
        .def_readwrite("gate", &TrackerConfig::gate)
        .def_readwrite("fps", &TrackerConfig::fps)
        .def_readwrite("emit_coasted", &TrackerConfig::emit_coasted)
        .def_readwrite("min_hits", &TrackerConfig::min_hits);

    py::class_<Detection>(m, "Detection")
        .def(py::init([](int frame, double left, double top, double width, double height,
                         double confidence) {
                 Detection d;
                 d.frame = frame;
                 d.bb_left = left;
                 d.bb_top = top;
                 d.bb_width = width;
                 d.bb_height = height;
                 d.confidence = confidence;
                 return d;
             }),
             py::arg("frame"), py::arg("left"), py::arg("top"), py::arg("width"),
             py::arg("height"), py::arg("confidence") = 1.0)
        .def_readwrite("frame", &Detection::frame)
        .def_readwrite("bb_left", &Detection::bb_left)
        .def_readwrite("bb_top", &Detection::bb_top)
        .def_readwrite("bb_width", &Detection::bb_width)
        .def_readwrite("bb_height", &Detection::bb_height)
        .def_readwrite("confidence", &Detection::confidence);

    py::class_<FrameOutput::Box>(m, "TrackBox")
        .def_readonly("id", &FrameOutput::Box::id)
        .def_readonly("bb_left", &FrameOutput::Box::bb_left)
        .def_readonly("bb_top", &FrameOutput::Box::bb_top)
        .def_readonly("bb_width", &FrameOutput::Box::bb_width)
        .def_readonly("bb_height", &FrameOutput::Box::bb_height);

    py::class_<FrameOutput>(m, "FrameOutput")
        .def_readonly("frame", &FrameOutput::frame)
        .def_readonly("boxes", &FrameOutput::boxes);

    py::class_<TrackerStats>(m, "TrackerStats")
        .def_readonly("frames", &TrackerStats::frames)
        .def_readonly("tracks_created", &TrackerStats::tracks_created)
        .def_readonly("tracks_deleted", &TrackerStats::tracks_deleted)
        .def_readonly("dropped_detections", &TrackerStats::dropped_detections);

    py::class_<Tracker>(m, "Tracker")
        .def(py::init([](const CameraModel& cam, const TrackerConfig& cfg) {
                 return Tracker(cam, cfg);
             }),
             py::arg("camera"), py::arg("config") = TrackerConfig{})
        .def("step", &Tracker::step, py::arg("frame"), py::arg("detections"))
        .def_property_readonly("stats", &Tracker::stats);

    m.def("run_sequence", &run_sequence, py::arg("detections_by_frame"), py::arg("camera"),
          py::arg("config") = TrackerConfig{}, py::arg("n_frames") = 0);

    m.def("parse_detections", &parse_detections, py::arg("path"));
    m.def("write_tracks", &write_tracks, py::arg("path"), py::arg("outputs"));

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("id_switches", &EvalReport::id_switches)
        .def_readonly("idf1", &EvalReport::idf1)
        .def_readonly("mota", &EvalReport::mota)
        .def_readonly("association_accuracy", &EvalReport::association_accuracy);

    py::class_<Scenario>(m, "Scenario")
        .def_readwrite("frames", &Scenario::frames)
        .def_readwrite("fps", &Scenario::fps)
        .def_readwrite("sigma_m", &Scenario::sigma_m);

    m.def("default_scenario", &default_scenario);
    m.def("parse_scenario", &parse_scenario, py::arg("path"));
    m.def(
        "run_synthetic",
        [](const Scenario& scenario, std::uint64_t seed, const TrackerConfig& cfg) {
            const SynthResult r = generate(scenario, seed);
            const auto outputs = run_sequence(r.detections, scenario.camera, cfg,
                                              scenario.frames);
            const EvalReport report =
                evaluate(to_ground_tracks(outputs, scenario.camera), r.gt_ground, 1.0);
            return report;
        },
        py::arg("scenario"), py::arg("seed") = 0, py::arg("config") = TrackerConfig{},
        "Generate a scenario, track it, and score the result.");
}

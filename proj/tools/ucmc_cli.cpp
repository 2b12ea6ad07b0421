// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ucmc/io.hpp"
#include "ucmc/synth.hpp"
#include "ucmc/tracker.hpp"

namespace fs = std::filesystem;
using namespace ucmc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDataError = 1;
constexpr int kExitCameraError = 2;
constexpr int kExitUsage = 64;

bool log_enabled() {
    const char* v = std::getenv("UCMC_LOG");
    return v != nullptr && *v != '\0';
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

void debug(const std::string& msg) {
    if (log_enabled()) std::cerr << "ucmc: " << msg << "\n";
}

struct TrackFlags {
    std::string det_path, cam_path, seqinfo_path, out_path;
    TrackerConfig config;
    double fps_flag = 0.0;  // 0 = derive from seqinfo, else 1 frame-unit
    int threads = 1;

    void add_common(CLI::App* cmd) {
        cmd->add_option("--det", det_path, "MOT detection file")->required();
        cmd->add_option("--cam", cam_path, "camera parameter file")->required();
        cmd->add_option("--seqinfo", seqinfo_path, "seqinfo.ini (provides fps)");
        cmd->add_option("--tau", config.tau,
                        "confidence threshold for new tracks")->capture_default_str();
        cmd->add_option("--dt-threshold", config.dt_threshold,
                        "lost time threshold, frames")->capture_default_str();
        cmd->add_option("--sigma-x", config.sigma_x,
                        "process compensation factor, x axis (m/s^2 scale)")
            ->capture_default_str();
        cmd->add_option("--sigma-y", config.sigma_y,
                        "process compensation factor, y axis (m/s^2 scale)")
            ->capture_default_str();
        cmd->add_option("--sigma-m", config.sigma_m,
                        "detection noise factor, dimensionless")->capture_default_str();
        cmd->add_option("--gate", config.gate,
                        "association gate on the normalized distance")->capture_default_str();
        cmd->add_option("--fps", fps_flag,
                        "frames per second; 0 = from seqinfo, else 1 frame-unit");
        cmd->add_flag("--emit-coasted", config.emit_coasted,
                      "also emit predicted-only tracks");
        cmd->add_option("--min-hits", config.min_hits,
                        "associations required before emitting")->capture_default_str();
        cmd->add_option("--threads", threads,
                        "workers for cost-matrix rows (output is identical)")
            ->capture_default_str();
    }

    void resolve_fps() {
        if (fps_flag > 0.0) {
            config.fps = fps_flag;
        } else if (!seqinfo_path.empty()) {
            const SeqInfo info = parse_seqinfo(seqinfo_path);
            for (const auto& w : info.warnings) warn(w);
            config.fps = info.fps;
        } else {
            config.fps = 1.0;  // dt = 1 frame-unit without sequence metadata
        }
        config.n_threads = threads;
    }
};

void print_summary(const TrackerStats& stats, const TrackerConfig& cfg, double wall_ms) {
    const double fps = wall_ms > 0.0 ? 1000.0 * static_cast<double>(stats.frames) / wall_ms : 0.0;
    std::printf(
        "{\"frames\":%lld,\"tracks_created\":%lld,\"tracks_deleted\":%lld,"
        "\"dropped_detections\":%lld,\"wall_ms\":%.3f,\"fps\":%.1f,"
        "\"tau\":%g,\"dt_threshold\":%d,\"sigma_x\":%g,\"sigma_y\":%g,"
        "\"sigma_m\":%g,\"gate\":%g,\"seq_fps\":%g,\"threads\":%d}\n",
        static_cast<long long>(stats.frames), static_cast<long long>(stats.tracks_created),
        static_cast<long long>(stats.tracks_deleted),
        static_cast<long long>(stats.dropped_detections), wall_ms, fps, cfg.tau,
        cfg.dt_threshold, cfg.sigma_x, cfg.sigma_y, cfg.sigma_m, cfg.gate, cfg.fps,
        cfg.n_threads);
}

int cmd_track(TrackFlags& flags) {
    flags.resolve_fps();
    const CameraModel cam = parse_camera(flags.cam_path);
    const auto detections = parse_detections(flags.det_path);

    int n_frames = 0;
    if (!flags.seqinfo_path.empty()) {
        n_frames = parse_seqinfo(flags.seqinfo_path).seq_length;
    }

    const auto start = std::chrono::steady_clock::now();
    Tracker tracker(cam, flags.config);
    std::vector<FrameOutput> outputs;
    const int last = n_frames > 0 ? n_frames
                     : detections.empty() ? 0
                                          : detections.rbegin()->first;
    static const std::vector<Detection> kNone;
    for (int f = 1; f <= last; ++f) {
        const auto it = detections.find(f);
        outputs.push_back(tracker.step(f, it == detections.end() ? kNone : it->second));
    }
    const auto stop = std::chrono::steady_clock::now();
    const double wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();

    write_tracks(flags.out_path, outputs);
    print_summary(tracker.stats(), flags.config, wall_ms);
    if (tracker.stats().dropped_detections > 0) {
        warn(std::to_string(tracker.stats().dropped_detections) +
             " detections dropped (bad boxes or horizon mappings)");
    }
    return kExitOk;
}

int cmd_bench(TrackFlags& flags, int repeat) {
    flags.resolve_fps();
    const CameraModel cam = parse_camera(flags.cam_path);
    const auto detections = parse_detections(flags.det_path);
    const int last = detections.empty() ? 0 : detections.rbegin()->first;

    std::vector<double> fps_runs;
    static const std::vector<Detection> kNone;
    for (int r = 0; r < repeat; ++r) {
        const auto start = std::chrono::steady_clock::now();
        Tracker tracker(cam, flags.config);
        for (int f = 1; f <= last; ++f) {
            const auto it = detections.find(f);
            tracker.step(f, it == detections.end() ? kNone : it->second);
        }
        const auto stop = std::chrono::steady_clock::now();
        const double secs = std::chrono::duration<double>(stop - start).count();
        fps_runs.push_back(secs > 0.0 ? static_cast<double>(last) / secs : 0.0);
        debug("run " + std::to_string(r + 1) + ": " + std::to_string(fps_runs.back()) + " fps");
    }
    std::sort(fps_runs.begin(), fps_runs.end());
    const size_t n = fps_runs.size();
    const double median =
        n % 2 == 1 ? fps_runs[n / 2] : 0.5 * (fps_runs[n / 2 - 1] + fps_runs[n / 2]);
    std::printf("fps_median=%.1f\n", median);
    return kExitOk;
}

int cmd_synth(const std::string& spec_path, std::uint64_t seed, const std::string& out_dir) {
    const Scenario scenario = parse_scenario(spec_path);
    const SynthResult result = generate(scenario, seed);
    fs::create_directories(out_dir);
    write_detections(fs::path(out_dir) / "det.txt", result.detections);
    write_tracks(fs::path(out_dir) / "gt.txt", result.gt_boxes);
    write_camera(fs::path(out_dir) / "cam.txt", scenario.camera);
    {
        std::ofstream ini(fs::path(out_dir) / "seqinfo.ini");
        if (!ini) throw IoError("cannot write seqinfo.ini in " + out_dir);
        ini << "[Sequence]\nname=synth\n"
            << "frameRate=" << scenario.fps << "\n"
            << "imWidth=" << scenario.im_width << "\n"
            << "imHeight=" << scenario.im_height << "\n"
            << "seqLength=" << scenario.frames << "\n";
    }
    std::printf("{\"frames\":%d,\"targets\":%zu,\"out_dir\":\"%s\"}\n", scenario.frames,
                scenario.targets.size(), out_dir.c_str());
    return kExitOk;
}

int cmd_eval(const std::string& tracks_path, const std::string& gt_path,
             const std::string& cam_path, double threshold) {
    const CameraModel cam = parse_camera(cam_path);
    const auto tracks = parse_track_file(tracks_path);
    const auto gt = parse_track_file(gt_path);
    if (!tracks.empty() && !gt.empty()) {
        const int t_lo = tracks.begin()->first, t_hi = tracks.rbegin()->first;
        const int g_lo = gt.begin()->first, g_hi = gt.rbegin()->first;
        if (t_hi < g_lo || g_hi < t_lo) {
            throw ParseError("track frames [" + std::to_string(t_lo) + "," +
                             std::to_string(t_hi) + "] and gt frames [" +
                             std::to_string(g_lo) + "," + std::to_string(g_hi) +
                             "] do not overlap");
        }
    }
    const EvalReport report = evaluate(to_ground_tracks(tracks, cam),
                                       to_ground_tracks(gt, cam), threshold);
    std::printf("idf1=%.6f\n", report.idf1);
    std::printf("mota=%.6f\n", report.mota);
    std::printf("id_switches=%d\n", report.id_switches);
    std::printf("association_accuracy=%.6f\n", report.association_accuracy);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"UCMC ground-plane multi-object tracker"};
    app.require_subcommand(1);

    TrackFlags track_flags;
    CLI::App* track = app.add_subcommand("track", "run tracking on a detection file");
    track_flags.add_common(track);
    track->add_option("--out", track_flags.out_path, "output MOT track file")->required();

    TrackFlags bench_flags;
    int repeat = 5;
    CLI::App* bench = app.add_subcommand("bench", "time the tracking loop, I/O excluded");
    bench_flags.add_common(bench);
    bench->add_option("--repeat", repeat, "benchmark repetitions")->capture_default_str();

    std::string spec_path, out_dir;
    std::uint64_t seed = 0;
    CLI::App* synth = app.add_subcommand("synth", "render a synthetic scenario");
    synth->add_option("--spec", spec_path, "scenario file")->required();
    synth->add_option("--seed", seed, "random seed")->capture_default_str();
    synth->add_option("--out-dir", out_dir, "output directory")->required();

    std::string eval_tracks, eval_gt, eval_cam;
    double eval_threshold = 1.0;
    CLI::App* eval = app.add_subcommand("eval", "score tracks against ground truth");
    eval->add_option("--tracks", eval_tracks, "MOT track file")->required();
    eval->add_option("--gt", eval_gt, "MOT ground-truth file")->required();
    eval->add_option("--cam", eval_cam, "camera parameter file")->required();
    eval->add_option("--threshold", eval_threshold,
                     "ground-plane match threshold, meters")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (track->parsed()) return cmd_track(track_flags);
        if (bench->parsed()) return cmd_bench(bench_flags, repeat);
        if (synth->parsed()) return cmd_synth(spec_path, seed, out_dir);
        if (eval->parsed()) return cmd_eval(eval_tracks, eval_gt, eval_cam, eval_threshold);
    } catch (const SingularProjection& e) {
        std::cerr << "camera error: " << e.what() << "\n";
        return kExitCameraError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    }
    return kExitUsage;
}

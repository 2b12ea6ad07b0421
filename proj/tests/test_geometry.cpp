// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "test_helpers.hpp"
#include "ucmc/geometry.hpp"

using namespace ucmc;
using namespace ucmc::testing;

namespace {

// Unit camera one length-unit behind the plane: A collapses to the identity.
ProjectionMatrix identity_projection() {
    CameraExtrinsics extr;
    extr.T << 0.0, 0.0, 1.0;
    return build_projection(CameraIntrinsics{1.0, 1.0, 0.0, 0.0}, extr, 0.0);
}

// Independent route: full 3x4 * 4x4 product with explicit loops, then the
// ground-plane column reduction.
Eigen::Matrix3d projection_by_hand(const CameraIntrinsics& in, const CameraExtrinsics& ex,
                                   double z0) {
    double ki[3][4] = {{in.fx, 0, in.u0, 0}, {0, in.fy, in.v0, 0}, {0, 0, 1, 0}};
    double ko[4][4] = {};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) ko[i][j] = ex.R(i, j);
    for (int i = 0; i < 3; ++i) ko[i][3] = ex.T(i);
    ko[3][3] = 1.0;
    double theta[3][4] = {};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) theta[i][j] += ki[i][k] * ko[k][j];
    Eigen::Matrix3d a;
    for (int i = 0; i < 3; ++i) {
        a(i, 0) = theta[i][0];
        a(i, 1) = theta[i][1];
        a(i, 2) = theta[i][2] * z0 + theta[i][3];
    }
    return a;
}

}  // namespace

TEST_CASE("build_projection identity case") {
    const ProjectionMatrix proj = identity_projection();
    CHECK(proj.A.isApprox(Eigen::Matrix3d::Identity(), 1e-15));
    CHECK(proj.A_inv.isApprox(Eigen::Matrix3d::Identity(), 1e-15));

    // z0 = 1 with zero translation gives the same collapse.
    const ProjectionMatrix via_z0 =
        build_projection(CameraIntrinsics{1.0, 1.0, 0.0, 0.0}, CameraExtrinsics{}, 1.0);
    CHECK(via_z0.A.isApprox(Eigen::Matrix3d::Identity(), 1e-15));

    // A ground plane through the camera center has no invertible mapping:
    // the third column of A vanishes.
    CHECK_THROWS_AS(
        build_projection(CameraIntrinsics{1.0, 1.0, 0.0, 0.0}, CameraExtrinsics{}, 0.0),
        SingularProjection);
}

TEST_CASE("build_projection matches hand multiply") {
    CameraExtrinsics extr;
    extr.T << 0.0, 0.0, 5.0;
    const CameraIntrinsics intr{1000.0, 1000.0, 960.0, 540.0};
    const ProjectionMatrix proj = build_projection(intr, extr, 0.0);

    Eigen::Matrix3d expected;
    expected << 1000, 0, 4800,
                0, 1000, 2700,
                0, 0, 5;
    CHECK(proj.A.isApprox(expected, 1e-12));
    CHECK(proj.A.isApprox(projection_by_hand(intr, extr, 0.0), 1e-12));

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const CameraModel cam = random_camera(rng);
        CHECK(cam.projection.A.isApprox(
            projection_by_hand(cam.intrinsics, cam.extrinsics, cam.z0), 1e-9));
        CHECK((cam.projection.A * cam.projection.A_inv)
                  .isApprox(Eigen::Matrix3d::Identity(), 1e-9));
    }
}

TEST_CASE("build_projection rejects reflections and singular cameras") {
    CameraExtrinsics mirrored;
    mirrored.R = Eigen::Matrix3d::Identity();
    mirrored.R(0, 0) = -1.0;  // det = -1
    CHECK_THROWS_AS(build_projection(CameraIntrinsics{1, 1, 0, 0}, mirrored, 0.0),
                    SingularProjection);

    // Optical axis parallel to the ground: A loses rank.
    CameraExtrinsics level;
    level.R << 1, 0, 0,
               0, 0, -1,
               0, 1, 0;  // no pitch, camera at the ground height
    level.T << 0, 0, 0;
    CHECK_THROWS_AS(build_projection(CameraIntrinsics{1000, 1000, 960, 540}, level, 0.0),
                    SingularProjection);

    CameraExtrinsics bad;
    bad.R *= 1.1;  // not orthonormal
    CHECK_THROWS_AS(build_projection(CameraIntrinsics{1, 1, 0, 0}, bad, 0.0),
                    SingularProjection);
}

TEST_CASE("image_to_ground identity and linear-solve oracle") {
    const ProjectionMatrix ident = identity_projection();
    const GroundPoint g = image_to_ground(ImagePoint{3.0, 7.0}, ident);
    CHECK(g.x == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(g.y == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(g.gamma == doctest::Approx(1.0).epsilon(1e-12));

    CameraExtrinsics extr;
    extr.T << 0.0, 0.0, 5.0;
    const ProjectionMatrix proj =
        build_projection(CameraIntrinsics{1000, 1000, 960, 540}, extr, 0.0);
    const ImagePoint center{960.0, 540.0};
    const GroundPoint back = image_to_ground(center, proj);

    // Independent oracle: solve A * [x, y, 1]^T = gamma * [u, v, 1]^T as a
    // dense linear system via QR instead of the cached adjugate inverse.
    const Eigen::Vector3d sol = proj.A.colPivHouseholderQr().solve(
        Eigen::Vector3d(center.u, center.v, 1.0));
    CHECK(back.x == doctest::Approx(sol(0) / sol(2)).epsilon(1e-12));
    CHECK(back.y == doctest::Approx(sol(1) / sol(2)).epsilon(1e-12));

    const ImagePoint round = ground_to_image(back, proj);
    CHECK(std::abs(round.u - center.u) < 1e-9);
    CHECK(std::abs(round.v - center.v) < 1e-9);
}

TEST_CASE("image_to_ground horizon pixel") {
    CameraExtrinsics extr;
    extr.T << 0.0, 0.0, 5.0;
    // A with a33 = 0 maps (0, 0) to b3 = 0: build singular-by-pixel case by
    // hand on a valid matrix instead, using the horizon line of a tilted cam.
    const CameraModel cam =
        make_camera(CameraIntrinsics{1000, 1000, 960, 540},
                    surveillance_extrinsics(30.0 * M_PI / 180.0, 5.0), 0.0);
    // Solve A_inv row 3 dot [u, v, 1] = 0 for v at u = 960.
    const Eigen::Matrix3d& ai = cam.projection.A_inv;
    const double u = 960.0;
    const double v_horizon = -(ai(2, 0) * u + ai(2, 2)) / ai(2, 1);
    CHECK_THROWS_AS(image_to_ground(ImagePoint{u, v_horizon}, cam.projection),
                    PointAtInfinity);
}

TEST_CASE("ground_to_image identity and behind-camera contract") {
    const ProjectionMatrix ident = identity_projection();
    const ImagePoint p = ground_to_image(GroundPoint{3.0, 7.0, 1.0}, ident);
    CHECK(p.u == doctest::Approx(3.0));
    CHECK(p.v == doctest::Approx(7.0));

    const CameraModel cam =
        make_camera(CameraIntrinsics{1000, 1000, 960, 540},
                    surveillance_extrinsics(30.0 * M_PI / 180.0, 5.0), 0.0);
    // A point far behind the camera still yields an algebraic result.
    double w3 = 0.0;
    CHECK_NOTHROW(ground_to_image(GroundPoint{0.0, -100.0, 1.0}, cam.projection, w3));
    CHECK(w3 < 0.0);
}

TEST_CASE("round trip property over random cameras") {
    std::mt19937_64 rng(11);
    int checked = 0;
    for (int c = 0; c < 20; ++c) {
        const CameraModel cam = random_camera(rng);
        for (int i = 0; i < 50; ++i) {
            const ImagePoint p = random_ground_pixel(cam, rng);
            const GroundPoint g = image_to_ground(p, cam.projection);
            const ImagePoint back = ground_to_image(g, cam.projection);
            CHECK(std::abs(back.u - p.u) < 1e-6);
            CHECK(std::abs(back.v - p.v) < 1e-6);
            ++checked;
        }
    }
    CHECK(checked == 1000);
}

TEST_CASE("pixel_noise_cov") {
    const Eigen::Matrix2d r = pixel_noise_cov(100.0, 200.0, 0.05);
    CHECK(r(0, 0) == doctest::Approx(25.0));
    CHECK(r(1, 1) == doctest::Approx(100.0));
    CHECK(r(0, 1) == 0.0);

    CHECK(pixel_noise_cov(1.0, 1.0, 1.0).isApprox(Eigen::Matrix2d::Identity()));
    CHECK_THROWS_AS(pixel_noise_cov(0.0, 10.0, 0.05), InvalidDimension);
    CHECK_THROWS_AS(pixel_noise_cov(10.0, -1.0, 0.05), InvalidDimension);
    CHECK_THROWS_AS(pixel_noise_cov(10.0, 10.0, 0.0), InvalidDimension);
}

TEST_CASE("map_measurement identity Jacobian") {
    const ProjectionMatrix ident = identity_projection();
    const GroundMeasurement m = map_measurement(ImagePoint{5.0, 9.0}, 10.0, 20.0, ident, 0.1);
    CHECK(m.position(0) == doctest::Approx(5.0));
    CHECK(m.position(1) == doctest::Approx(9.0));
    CHECK(m.cov.isApprox(pixel_noise_cov(10.0, 20.0, 0.1), 1e-12));
}

TEST_CASE("analytic Jacobian matches central finite differences") {
    std::mt19937_64 rng(23);
    const double step = 1e-4;
    for (int c = 0; c < 100; ++c) {
        const CameraModel cam = random_camera(rng);
        const ImagePoint p = random_ground_pixel(cam, rng);
        const GroundPoint g = image_to_ground(p, cam.projection);
        const Eigen::Matrix2d analytic = ground_jacobian(g, cam.projection);

        Eigen::Matrix2d fd;
        for (int k = 0; k < 2; ++k) {
            const double du = k == 0 ? step : 0.0;
            const double dv = k == 1 ? step : 0.0;
            const GroundPoint gp = image_to_ground(ImagePoint{p.u + du, p.v + dv}, cam.projection);
            const GroundPoint gm = image_to_ground(ImagePoint{p.u - du, p.v - dv}, cam.projection);
            fd(0, k) = (gp.x - gm.x) / (2.0 * step);
            fd(1, k) = (gp.y - gm.y) / (2.0 * step);
        }
        const double scale = fd.cwiseAbs().maxCoeff();
        CHECK((analytic - fd).cwiseAbs().maxCoeff() / scale < 1e-5);
    }
}

TEST_CASE("mapped covariance is symmetric PSD and correlated under tilt") {
    std::mt19937_64 rng(31);
    for (int c = 0; c < 200; ++c) {
        const CameraModel cam = random_camera(rng);
        const ImagePoint p = random_ground_pixel(cam, rng);
        const GroundMeasurement m = map_measurement(p, 50.0, 120.0, cam.projection, 0.05);
        CHECK((m.cov - m.cov.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m.cov);
        CHECK(es.eigenvalues().minCoeff() >= -1e-12);
    }

    // Canonical tilted camera, off-center pixel: correlation must appear.
    const CameraModel cam =
        make_camera(CameraIntrinsics{1000, 1000, 960, 540},
                    surveillance_extrinsics(30.0 * M_PI / 180.0, 5.0), 0.0);
    const GroundMeasurement m =
        map_measurement(ImagePoint{1200.0, 800.0}, 50.0, 120.0, cam.projection, 0.05);
    CHECK(std::abs(m.cov(0, 1)) > 0.0);
}

TEST_CASE("covariance scales quadratically in sigma_m") {
    const CameraModel cam =
        make_camera(CameraIntrinsics{1000, 1000, 960, 540},
                    surveillance_extrinsics(40.0 * M_PI / 180.0, 6.0), 0.0);
    const ImagePoint p{1100.0, 700.0};
    const GroundMeasurement base = map_measurement(p, 50.0, 120.0, cam.projection, 0.05);
    const GroundMeasurement scaled = map_measurement(p, 50.0, 120.0, cam.projection, 0.15);
    CHECK(scaled.cov.isApprox(9.0 * base.cov, 1e-12));
}

TEST_CASE("covariance grows toward the horizon") {
    const CameraModel cam =
        make_camera(CameraIntrinsics{1000, 1000, 960, 540},
                    surveillance_extrinsics(30.0 * M_PI / 180.0, 5.0), 0.0);
    double previous = 0.0;
    // Walk a pixel column upward toward the horizon: trace(R_k) must grow.
    for (double v = 1000.0; v >= 400.0; v -= 100.0) {
        const GroundMeasurement m =
            map_measurement(ImagePoint{960.0, v}, 50.0, 120.0, cam.projection, 0.05);
        const double spread = m.cov.trace();
        CHECK(spread > previous);
        previous = spread;
    }
}

// SPDX-License-Identifier: Apache-2.0

#include "ucmc/geometry.hpp"

#include <cmath>

namespace ucmc {

namespace {

constexpr double kSingularDetTol = 1e-12;
constexpr double kHorizonTol = 1e-12;

// Explicit 3x3 adjugate; paired with the determinant this gives the inverse
// without an iterative solver.
Eigen::Matrix3d adjugate(const Eigen::Matrix3d& m) {
    Eigen::Matrix3d adj;
    adj(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    adj(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
    adj(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
    adj(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
    adj(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
    adj(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
    adj(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
    adj(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
    adj(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return adj;
}

}  // namespace

bool CameraExtrinsics::is_orthonormal(double tol) const {
    const Eigen::Matrix3d err = R.transpose() * R - Eigen::Matrix3d::Identity();
    if (err.cwiseAbs().maxCoeff() > tol) return false;
    return R.determinant() > 0.0;
}

ProjectionMatrix build_projection(const CameraIntrinsics& intr,
                                  const CameraExtrinsics& extr,
                                  double z0) {
    if (!(intr.fx > 0.0) || !(intr.fy > 0.0) ||
        !std::isfinite(intr.u0) || !std::isfinite(intr.v0)) {
        throw SingularProjection("invalid intrinsics");
    }
    if (!extr.is_orthonormal()) {
        throw SingularProjection("extrinsic rotation is not orthonormal");
    }

    Eigen::Matrix<double, 3, 4> Ki;
    Ki << intr.fx, 0.0, intr.u0, 0.0,
          0.0, intr.fy, intr.v0, 0.0,
          0.0, 0.0, 1.0, 0.0;
    Eigen::Matrix4d Ko = Eigen::Matrix4d::Identity();
    Ko.topLeftCorner<3, 3>() = extr.R;
    Ko.topRightCorner<3, 1>() = extr.T;

    const Eigen::Matrix<double, 3, 4> theta = Ki * Ko;

    ProjectionMatrix proj;
    proj.z0 = z0;
    proj.A.col(0) = theta.col(0);
    proj.A.col(1) = theta.col(1);
    proj.A.col(2) = theta.col(2) * z0 + theta.col(3);

    // Scale-invariant singularity test: normalize by the largest entry first.
    const double scale = proj.A.cwiseAbs().maxCoeff();
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw SingularProjection("projection matrix is zero or non-finite");
    }
    const double det_normalized = (proj.A / scale).determinant();
    if (std::abs(det_normalized) < kSingularDetTol) {
        throw SingularProjection("projection matrix is singular");
    }

    proj.A_inv = adjugate(proj.A) / proj.A.determinant();
    return proj;
}

CameraModel make_camera(const CameraIntrinsics& intr,
                        const CameraExtrinsics& extr,
                        double z0) {
    CameraModel cam;
    cam.intrinsics = intr;
    cam.extrinsics = extr;
    cam.z0 = z0;
    cam.projection = build_projection(intr, extr, z0);
    return cam;
}

GroundPoint image_to_ground(const ImagePoint& p, const ProjectionMatrix& proj) {
    const Eigen::Vector3d b = proj.A_inv * Eigen::Vector3d(p.u, p.v, 1.0);
    if (std::abs(b(2)) < kHorizonTol) {
        throw PointAtInfinity("pixel maps to the horizon line");
    }
    GroundPoint g;
    g.x = b(0) / b(2);
    g.y = b(1) / b(2);
    g.gamma = 1.0 / b(2);
    return g;
}

ImagePoint ground_to_image(const GroundPoint& g, const ProjectionMatrix& proj,
                           double& w3_out) {
    const Eigen::Vector3d w = proj.A * Eigen::Vector3d(g.x, g.y, 1.0);
    if (std::abs(w(2)) < kHorizonTol) {
        throw PointAtInfinity("ground point projects to infinity");
    }
    w3_out = w(2);
    return ImagePoint{w(0) / w(2), w(1) / w(2)};
}

ImagePoint ground_to_image(const GroundPoint& g, const ProjectionMatrix& proj) {
    double w3 = 0.0;
    return ground_to_image(g, proj, w3);
}

Eigen::Matrix2d pixel_noise_cov(double w, double h, double sigma_m) {
    if (!(w > 0.0) || !(h > 0.0)) {
        throw InvalidDimension("bounding box dimensions must be positive");
    }
    if (!(sigma_m > 0.0)) {
        throw InvalidDimension("detection noise factor must be positive");
    }
    Eigen::Matrix2d r = Eigen::Matrix2d::Zero();
    r(0, 0) = (sigma_m * w) * (sigma_m * w);
    r(1, 1) = (sigma_m * h) * (sigma_m * h);
    return r;
}

Eigen::Matrix2d ground_jacobian(const GroundPoint& g, const ProjectionMatrix& proj) {
    const Eigen::Matrix3d& a = proj.A_inv;
    Eigen::Matrix2d c;
    c(0, 0) = g.gamma * (a(0, 0) - a(2, 0) * g.x);
    c(0, 1) = g.gamma * (a(0, 1) - a(2, 1) * g.x);
    c(1, 0) = g.gamma * (a(1, 0) - a(2, 0) * g.y);
    c(1, 1) = g.gamma * (a(1, 1) - a(2, 1) * g.y);
    return c;
}

GroundMeasurement map_measurement(const ImagePoint& p, double w, double h,
                                  const ProjectionMatrix& proj, double sigma_m) {
    const GroundPoint g = image_to_ground(p, proj);
    const Eigen::Matrix2d c = ground_jacobian(g, proj);
    const Eigen::Matrix2d r_uv = pixel_noise_cov(w, h, sigma_m);

    GroundMeasurement m;
    m.position = Eigen::Vector2d(g.x, g.y);
    const Eigen::Matrix2d r = c * r_uv * c.transpose();
    m.cov = 0.5 * (r + r.transpose());  // products drift off symmetric
    return m;
}

}  // namespace ucmc

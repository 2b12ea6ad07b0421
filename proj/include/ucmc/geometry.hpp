// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include "ucmc/errors.hpp"

namespace ucmc {

/// Pinhole intrinsics: focal lengths and principal point, in pixels.
struct CameraIntrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double u0 = 0.0;
    double v0 = 0.0;
};

/// World-to-camera rotation and translation. Translation shares the units of
/// the ground coordinates (meters by convention).
struct CameraExtrinsics {
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    Eigen::Vector3d T = Eigen::Vector3d::Zero();

    /// Max deviation of R'R from identity plus determinant sign check.
    bool is_orthonormal(double tol = 1e-6) const;
};

struct ImagePoint {
    double u = 0.0;
    double v = 0.0;
};

/// Ground-plane position plus the scale factor recovered during
/// back-projection (gamma = 1/b3).
struct GroundPoint {
    double x = 0.0;
    double y = 0.0;
    double gamma = 1.0;
};

/// The 3x3 map between ground-plane and pixel homogeneous coordinates,
/// with its inverse cached at construction.
struct ProjectionMatrix {
    Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
    Eigen::Matrix3d A_inv = Eigen::Matrix3d::Identity();
    double z0 = 0.0;
};

/// Ground-plane measurement: position with its mapped 2x2 covariance.
struct GroundMeasurement {
    Eigen::Vector2d position = Eigen::Vector2d::Zero();
    Eigen::Matrix2d cov = Eigen::Matrix2d::Identity();
};

/// Full camera description used by the tracker.
struct CameraModel {
    CameraIntrinsics intrinsics;
    CameraExtrinsics extrinsics;
    double z0 = 0.0;
    ProjectionMatrix projection;
};

/// Builds A from the intrinsic/extrinsic product with the ground plane fixed
/// at height z0, and caches the explicit adjugate inverse.
///
/// Throws SingularProjection if the extrinsics are not orthonormal or the
/// resulting matrix is singular (optical axis parallel to the ground).
ProjectionMatrix build_projection(const CameraIntrinsics& intr,
                                  const CameraExtrinsics& extr,
                                  double z0);

/// Convenience: validated CameraModel with the projection built eagerly.
CameraModel make_camera(const CameraIntrinsics& intr,
                        const CameraExtrinsics& extr,
                        double z0);

/// Back-projects a pixel onto the ground plane. Throws PointAtInfinity when
/// the pixel lies on the horizon line (|b3| < 1e-12).
GroundPoint image_to_ground(const ImagePoint& p, const ProjectionMatrix& proj);

/// Projects a ground point into the image. Returns the algebraic result even
/// for points behind the camera; callers gate on visibility. Throws
/// PointAtInfinity when the homogeneous scale vanishes.
ImagePoint ground_to_image(const GroundPoint& g, const ProjectionMatrix& proj);

/// Same, but also reports the homogeneous scale w3 (= gamma); w3 <= 0 means
/// the point projects from behind the camera.
ImagePoint ground_to_image(const GroundPoint& g, const ProjectionMatrix& proj,
                           double& w3_out);

/// Independent pixel noise for a w x h detection box: diag((s*w)^2, (s*h)^2).
/// Throws InvalidDimension on non-positive inputs.
Eigen::Matrix2d pixel_noise_cov(double w, double h, double sigma_m);

/// Analytic Jacobian of the image-to-ground map at the given back-projection.
Eigen::Matrix2d ground_jacobian(const GroundPoint& g, const ProjectionMatrix& proj);

/// Maps a pixel measurement with box size (w, h) to the ground plane with
/// its correlated covariance C * R_uv * C'. Propagates PointAtInfinity.
GroundMeasurement map_measurement(const ImagePoint& p, double w, double h,
                                  const ProjectionMatrix& proj, double sigma_m);

}  // namespace ucmc

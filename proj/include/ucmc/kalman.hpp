// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include "ucmc/errors.hpp"
#include "ucmc/geometry.hpp"

namespace ucmc {

using Vector4d = Eigen::Vector4d;
using Matrix4d = Eigen::Matrix4d;
using Matrix24d = Eigen::Matrix<double, 2, 4>;
using Matrix42d = Eigen::Matrix<double, 4, 2>;

/// Constant-velocity state on the ground plane, ordered [x, vx, y, vy].
struct KalmanState {
    Vector4d x_hat = Vector4d::Zero();
    Matrix4d P = Matrix4d::Identity();
};

/// Process-noise compensation factors and the inter-frame interval.
struct ProcessNoiseParams {
    double sigma_x = 0.0;
    double sigma_y = 0.0;
    double dt = 1.0;
};

/// State transition for one step of length dt: [[1,dt],[0,1]] per axis.
Matrix4d make_F(double dt);

/// Observation matrix selecting the positions: [[1,0,0,0],[0,0,1,0]].
Matrix24d make_H();

/// Camera-motion process noise Q = G diag(sigma_x, sigma_y) G' with
/// G = [[dt^2/2,0],[dt,0],[0,dt^2/2],[0,dt]].
Matrix4d make_Q(const ProcessNoiseParams& params);

/// Prior velocity standard deviation used to seed new tracks (m/s).
inline constexpr double kInitialVelocityStd = 5.0;

/// Fresh state at a measured position: zero velocity, position variances
/// taken from the measurement covariance diagonal.
KalmanState init_state(const GroundMeasurement& z);

/// x <- F x, P <- F P F' + Q, re-symmetrized.
KalmanState predict(const KalmanState& s, const ProcessNoiseParams& params);

/// Standard Kalman update with the mapped ground measurement. Throws
/// DegenerateInnovation when the innovation covariance is singular.
KalmanState update(const KalmanState& s, const GroundMeasurement& z);

}  // namespace ucmc

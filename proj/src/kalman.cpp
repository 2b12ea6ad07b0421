// SPDX-License-Identifier: Apache-2.0

#include "ucmc/kalman.hpp"

#include <cmath>

namespace ucmc {

namespace {
constexpr double kInnovationDetTol = 1e-15;

Matrix4d symmetrized(const Matrix4d& m) {
    return 0.5 * (m + m.transpose());
}
}  // namespace

Matrix4d make_F(double dt) {
    Matrix4d f = Matrix4d::Identity();
    f(0, 1) = dt;
    f(2, 3) = dt;
    return f;
}

Matrix24d make_H() {
    Matrix24d h = Matrix24d::Zero();
    h(0, 0) = 1.0;
    h(1, 2) = 1.0;
    return h;
}

Matrix4d make_Q(const ProcessNoiseParams& params) {
    const double dt = params.dt;
    Matrix42d g = Matrix42d::Zero();
    g(0, 0) = 0.5 * dt * dt;
    g(1, 0) = dt;
    g(2, 1) = 0.5 * dt * dt;
    g(3, 1) = dt;
    Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();
    sigma(0, 0) = params.sigma_x;
    sigma(1, 1) = params.sigma_y;
    const Matrix4d q = g * sigma * g.transpose();
    return symmetrized(q);
}

KalmanState init_state(const GroundMeasurement& z) {
    KalmanState s;
    s.x_hat << z.position(0), 0.0, z.position(1), 0.0;
    const double v_var = kInitialVelocityStd * kInitialVelocityStd;
    s.P = Matrix4d::Zero();
    s.P(0, 0) = z.cov(0, 0);
    s.P(1, 1) = v_var;
    s.P(2, 2) = z.cov(1, 1);
    s.P(3, 3) = v_var;
    return s;
}

KalmanState predict(const KalmanState& s, const ProcessNoiseParams& params) {
    const Matrix4d f = make_F(params.dt);
    KalmanState out;
    out.x_hat = f * s.x_hat;
    out.P = symmetrized(f * s.P * f.transpose() + make_Q(params));
    return out;
}

KalmanState update(const KalmanState& s, const GroundMeasurement& z) {
    const Matrix24d h = make_H();
    const Eigen::Matrix2d innovation_cov = h * s.P * h.transpose() + z.cov;
    if (std::abs(innovation_cov.determinant()) < kInnovationDetTol) {
        throw DegenerateInnovation("innovation covariance is singular");
    }
    const Eigen::Vector2d residual = z.position - h * s.x_hat;
    const Matrix42d gain = s.P * h.transpose() * innovation_cov.inverse();

    KalmanState out;
    out.x_hat = s.x_hat + gain * residual;
    out.P = symmetrized((Matrix4d::Identity() - gain * h) * s.P);
    return out;
}

}  // namespace ucmc

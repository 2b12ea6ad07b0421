// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ucmc/geometry.hpp"
#include "ucmc/kalman.hpp"

namespace ucmc {

/// Innovation between a mapped measurement and a predicted track state.
Eigen::Vector2d residual(const GroundMeasurement& z, const KalmanState& s);

/// Innovation covariance S = H P H' + R.
Eigen::Matrix2d residual_cov(const KalmanState& s, const GroundMeasurement& z);

/// Normalized Mahalanobis distance D = e' S^-1 e + ln|S|.
///
/// D can be negative when |S| < 1; callers must not assume non-negativity.
/// Throws DegenerateInnovation when S is singular or not positive definite.
double mmd(const GroundMeasurement& z, const KalmanState& s);

/// Track-by-detection cost matrix. Forbidden entries (gated out or
/// degenerate) hold +infinity; the solver never matches through them.
struct CostMatrix {
    Eigen::MatrixXd cost;  // n_tracks x n_dets, +inf = forbidden
    double gate = 0.0;

    int rows() const { return static_cast<int>(cost.rows()); }
    int cols() const { return static_cast<int>(cost.cols()); }
};

/// Matched pairs plus the leftovers on both sides. Every track and
/// detection index appears exactly once across the three lists.
struct AssignmentResult {
    std::vector<std::pair<int, int>> matches;  // (track, det), sorted by track
    std::vector<int> unmatched_tracks;
    std::vector<int> unmatched_dets;
};

/// Fills C[i][j] = mmd(measurement j, track i); entries above the gate are
/// forbidden. Degenerate pairs are forbidden rather than fatal. Rows can be
/// computed on n_threads workers; the result is identical either way.
CostMatrix build_cost_matrix(std::span<const KalmanState> tracks,
                             std::span<const GroundMeasurement> measurements,
                             double gate, int n_threads = 1);

/// Minimum-cost assignment among maximum-cardinality matchings that avoid
/// forbidden entries. Negative costs are fine. Among equal-cost optima the
/// lexicographically smallest match list by (track, det) is returned.
AssignmentResult solve_assignment(const CostMatrix& c);

}  // namespace ucmc

// SPDX-License-Identifier: Apache-2.0

#include "ucmc/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace ucmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDetTol = 1e-15;

struct CoreSolution {
    std::vector<int> row_to_col;
    double total = 0.0;
    int cardinality = 0;
};

// Minimum-cost maximum-cardinality matching by successive shortest
// augmenting paths with node potentials. Each round runs one Dijkstra from
// all still-free rows at once and augments to the nearest free column; when
// no free column is reachable the matching is maximum. Costs are offset by
// the smallest finite entry so reduced costs start non-negative, which is
// argmin-invariant at fixed cardinality. Forbidden (+inf) entries are simply
// absent edges; no large finite surrogate is ever introduced.
CoreSolution solve_core(const Eigen::MatrixXd& cost) {
    const int nr = static_cast<int>(cost.rows());
    const int nc = static_cast<int>(cost.cols());
    CoreSolution sol;
    sol.row_to_col.assign(nr, -1);
    if (nr == 0 || nc == 0) return sol;

    double offset = kInf;
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nc; ++j)
            if (std::isfinite(cost(i, j))) offset = std::min(offset, cost(i, j));
    if (!std::isfinite(offset)) return sol;  // everything forbidden

    std::vector<int> col_to_row(nc, -1);
    std::vector<double> pi_row(nr, 0.0), pi_col(nc, 0.0);
    std::vector<double> dist_row(nr), dist_col(nc);
    std::vector<char> done_row(nr), done_col(nc);
    std::vector<int> prev_row_of_col(nc);

    while (true) {
        std::fill(dist_row.begin(), dist_row.end(), kInf);
        std::fill(dist_col.begin(), dist_col.end(), kInf);
        std::fill(done_row.begin(), done_row.end(), 0);
        std::fill(done_col.begin(), done_col.end(), 0);
        std::fill(prev_row_of_col.begin(), prev_row_of_col.end(), -1);
        for (int i = 0; i < nr; ++i)
            if (sol.row_to_col[i] < 0) dist_row[i] = 0.0;

        int target = -1;
        double target_dist = kInf;
        while (true) {
            // Dense Dijkstra step over the union of row and column nodes.
            int best_row = -1, best_col = -1;
            double best = kInf;
            for (int i = 0; i < nr; ++i)
                if (!done_row[i] && dist_row[i] < best) { best = dist_row[i]; best_row = i; best_col = -1; }
            for (int j = 0; j < nc; ++j)
                if (!done_col[j] && dist_col[j] < best) { best = dist_col[j]; best_col = j; best_row = -1; }
            if (best_row < 0 && best_col < 0) break;

            if (best_col >= 0) {
                done_col[best_col] = 1;
                if (col_to_row[best_col] < 0) {  // free column: augmenting path found
                    target = best_col;
                    target_dist = best;
                    break;
                }
                // residual edge through the matched row, tight by invariant
                const int r = col_to_row[best_col];
                if (!done_row[r] && best < dist_row[r]) dist_row[r] = best;
            } else {
                done_row[best_row] = 1;
                const int i = best_row;
                for (int j = 0; j < nc; ++j) {
                    if (done_col[j] || !std::isfinite(cost(i, j))) continue;
                    const double rc = std::max(0.0, (cost(i, j) - offset) + pi_row[i] - pi_col[j]);
                    const double nd = dist_row[i] + rc;
                    if (nd < dist_col[j]) {
                        dist_col[j] = nd;
                        prev_row_of_col[j] = i;
                    }
                }
            }
        }
        if (target < 0) break;  // no augmenting path left: matching is maximum

        for (int i = 0; i < nr; ++i)
            pi_row[i] += std::min(dist_row[i], target_dist);
        for (int j = 0; j < nc; ++j)
            pi_col[j] += std::min(dist_col[j], target_dist);

        // Flip the matching along the augmenting path.
        int c = target;
        while (c >= 0) {
            const int r = prev_row_of_col[c];
            const int next = sol.row_to_col[r];
            sol.row_to_col[r] = c;
            col_to_row[c] = r;
            c = next;
        }
    }

    for (int i = 0; i < nr; ++i) {
        if (sol.row_to_col[i] >= 0) {
            sol.total += cost(i, sol.row_to_col[i]);
            ++sol.cardinality;
        }
    }
    return sol;
}

// Optimal value/cardinality achievable on the rows in [first_row, nr) and
// the still-unused columns.
CoreSolution solve_suffix(const Eigen::MatrixXd& cost, int first_row,
                          const std::vector<char>& col_used) {
    const int nr = static_cast<int>(cost.rows());
    const int nc = static_cast<int>(cost.cols());
    std::vector<int> rows, cols;
    for (int i = first_row; i < nr; ++i) rows.push_back(i);
    for (int j = 0; j < nc; ++j)
        if (!col_used[j]) cols.push_back(j);
    Eigen::MatrixXd sub(rows.size(), cols.size());
    for (size_t a = 0; a < rows.size(); ++a)
        for (size_t b = 0; b < cols.size(); ++b)
            sub(a, b) = cost(rows[a], cols[b]);
    return solve_core(sub);
}

}  // namespace

Eigen::Vector2d residual(const GroundMeasurement& z, const KalmanState& s) {
    return z.position - make_H() * s.x_hat;
}

Eigen::Matrix2d residual_cov(const KalmanState& s, const GroundMeasurement& z) {
    const Matrix24d h = make_H();
    const Eigen::Matrix2d cov = h * s.P * h.transpose() + z.cov;
    return 0.5 * (cov + cov.transpose());
}

double mmd(const GroundMeasurement& z, const KalmanState& s) {
    const Eigen::Matrix2d cov = residual_cov(s, z);
    const double det = cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(1, 0);
    if (!(det > kDetTol)) {
        throw DegenerateInnovation("innovation covariance is singular");
    }
    const Eigen::LLT<Eigen::Matrix2d> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw DegenerateInnovation("innovation covariance is not positive definite");
    }
    const Eigen::Vector2d eps = residual(z, s);
    const double maha = eps.dot(llt.solve(eps));
    const Eigen::Matrix2d l = llt.matrixL();
    const double log_det = 2.0 * (std::log(l(0, 0)) + std::log(l(1, 1)));
    return maha + log_det;
}

CostMatrix build_cost_matrix(std::span<const KalmanState> tracks,
                             std::span<const GroundMeasurement> measurements,
                             double gate, int n_threads) {
    const int nr = static_cast<int>(tracks.size());
    const int nc = static_cast<int>(measurements.size());
    CostMatrix cm;
    cm.gate = gate;
    cm.cost.resize(nr, nc);
    if (nr == 0 || nc == 0) return cm;

    auto fill_rows = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            for (int j = 0; j < nc; ++j) {
                double d;
                try {
                    d = mmd(measurements[j], tracks[i]);
                } catch (const DegenerateInnovation&) {
                    cm.cost(i, j) = kInf;
                    continue;
                }
                cm.cost(i, j) = (d > gate) ? kInf : d;
            }
        }
    };

    n_threads = std::max(1, std::min(n_threads, nr));
    if (n_threads == 1) {
        fill_rows(0, nr);
    } else {
        std::vector<std::thread> workers;
        const int chunk = (nr + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            const int begin = t * chunk;
            const int end = std::min(nr, begin + chunk);
            if (begin < end) workers.emplace_back(fill_rows, begin, end);
        }
        for (auto& w : workers) w.join();
    }
    return cm;
}

AssignmentResult solve_assignment(const CostMatrix& c) {
    const int nr = c.rows();
    const int nc = c.cols();
    const CoreSolution base = solve_core(c.cost);
    const double tol = 1e-9 * std::max(1.0, std::abs(base.total));

    // Lexicographic tie-break: walk tracks in order and pin the smallest
    // detection index that still admits a completion at the optimal
    // cardinality and cost. Gating keeps the candidate lists short, so the
    // constrained re-solves stay cheap.
    std::vector<char> col_used(nc, 0);
    AssignmentResult out;
    double fixed_cost = 0.0;
    int fixed_count = 0;
    for (int i = 0; i < nr; ++i) {
        int chosen = -1;
        for (int j = 0; j < nc; ++j) {
            if (col_used[j] || !std::isfinite(c.cost(i, j))) continue;
            col_used[j] = 1;
            const CoreSolution rest = solve_suffix(c.cost, i + 1, col_used);
            col_used[j] = 0;
            if (fixed_count + 1 + rest.cardinality == base.cardinality &&
                std::abs(fixed_cost + c.cost(i, j) + rest.total - base.total) <= tol) {
                chosen = j;
                break;
            }
        }
        if (chosen >= 0) {
            out.matches.emplace_back(i, chosen);
            col_used[chosen] = 1;
            fixed_cost += c.cost(i, chosen);
            ++fixed_count;
        } else {
            out.unmatched_tracks.push_back(i);
        }
    }
    for (int j = 0; j < nc; ++j)
        if (!col_used[j]) out.unmatched_dets.push_back(j);
    return out;
}

}  // namespace ucmc

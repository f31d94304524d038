#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "pgo/pieadmm.hpp"
#include "pgo/pose_graph.hpp"

namespace pgo {

struct LsParams {
    double tol = 1e-5;
    int max_iter = 50;
    double lm_lambda0 = 1e-4;
    double lm_up = 10.0;
    double lm_down = 0.5;
    int threads = 0;  // 0: OpenMP default
};

/*
 * Whitened residuals of the single-rotation objective, 7 rows per edge:
 *   rows 0-2  sqrt(sigma1_hat) (t_j - t_i - R(q_i) t_ij)
 *   rows 3-6  sqrt(sigma2) vec(q_j* q_i q_ij - 1)
 * Jacobian columns are 6 per vertex: a 3-dim rotation increment d with
 * retraction q <- normalize(q (1, d)), then the translation.
 */
struct ResidualSystem {
    Eigen::VectorXd r;
    Eigen::SparseMatrix<double> J;
    double cost() const { return r.squaredNorm(); }
};

ResidualSystem build_residuals(const std::vector<Pose>& poses, const PoseGraph& graph);

// Pose moved by a 6-vector (rotation increment, translation increment).
Pose retract(const Pose& pose, const Eigen::Matrix<double, 6, 1>& delta);

enum class LsStatus { Converged, MaxIterations, Stalled, CostIncreased };
std::string to_string(LsStatus status);

struct LsResult {
    std::vector<Pose> poses;
    std::vector<IterationRecord> history;  // history[0] is the initial point
    LsStatus status = LsStatus::MaxIterations;
    int iterations = 0;       // accepted steps
    double final_lambda = 0.0;
};

// Per-iteration record: f and g are the translation and rotation parts of
// the cost, lagrangian = phi = total cost, residual = relative decrease.
using LsCallback = std::function<void(const IterationRecord&, const std::vector<Pose>&)>;

/*
 * Both solvers freeze vertex 0 to fix the gauge. Stop when
 * (F_k - F_{k+1}) / F_{k+1} < tol, at max_iter, or once the cost is zero.
 * Gauss-Newton stops without taking a step that raises the cost and throws
 * NumericalError on singular normal equations.
 */
LsResult gauss_newton_solve(const PoseGraph& graph, const std::vector<Pose>& init, const LsParams& params,
                            const LsCallback& callback = {});
LsResult levenberg_marquardt_solve(const PoseGraph& graph, const std::vector<Pose>& init, const LsParams& params,
                                   const LsCallback& callback = {});

// One damped step (J^T J + lambda diag(J^T J)) d = -J^T r with vertex 0
// frozen; lambda = 0 gives the Gauss-Newton step. Exposed for tests.
Eigen::VectorXd damped_step(const ResidualSystem& sys, double lambda);

}  // namespace pgo

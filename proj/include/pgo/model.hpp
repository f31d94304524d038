#pragma once

#include <vector>

#include "pgo/pose_graph.hpp"

namespace pgo {

/*
 * Variables of the split model: p (unit, one per vertex), q (free 4-vectors
 * coupled to p through the constraint p = q), translations t and the
 * multipliers lambda of p = q.
 *
 *   f(p, q, t) = sum_(i,j) || [0, t_j - t_i] - q_i [0, t_ij] p_i* ||^2_{sigma1}
 *   g(p, q)    = sum_(i,j) || p_j* q_i q_ij - 1 ||^2_{sigma2}
 *
 * With p = q the sum f + g is the single-rotation pose-graph objective.
 */
struct SplitVariables {
    std::vector<UnitQuaternion> p;
    std::vector<Vec4> q;
    std::vector<Vec3> t;
    std::vector<Vec4> lambda;

    // p = q = pose rotations, lambda = 0.
    static SplitVariables from_poses(const std::vector<Pose>& poses);
    std::vector<Pose> poses() const;  // (p, t)
    int size() const { return static_cast<int>(p.size()); }
};

struct LipschitzEstimates {
    double L_f_p = 0.0;
    double L_g_p = 0.0;
    double L_f_q = 0.0;
    double L_g_q = 0.0;
    double L_f = 0.0;
    double L_g = 0.0;
};

struct StationarityReport {
    double s_p = 0.0;
    double s_q = 0.0;
    double s_t = 0.0;
    double s_feas = 0.0;
};

// Residual quaternions of a single edge.
Quaternion translation_residual(const Edge& e, const Vec4& q_i, const UnitQuaternion& p_i, const Vec3& t_i,
                                const Vec3& t_j);
Quaternion rotation_residual(const Edge& e, const Vec4& q_i, const UnitQuaternion& p_j);

double eval_f(const SplitVariables& vars, const PoseGraph& graph);
double eval_g(const SplitVariables& vars, const PoseGraph& graph);

// Same objectives assembled from the M/W matrix forms instead of quaternion
// products; used to cross-check the two routes.
double eval_f_matrix(const SplitVariables& vars, const PoseGraph& graph);
double eval_g_matrix(const SplitVariables& vars, const PoseGraph& graph);

// Euclidean gradients, one entry per vertex.
std::vector<Vec4> grad_p_f(const SplitVariables& vars, const PoseGraph& graph);
std::vector<Vec4> grad_p_g(const SplitVariables& vars, const PoseGraph& graph);
std::vector<Vec4> grad_q_f(const SplitVariables& vars, const PoseGraph& graph);
std::vector<Vec4> grad_q_g(const SplitVariables& vars, const PoseGraph& graph);
std::vector<Vec3> grad_t_f(const SplitVariables& vars, const PoseGraph& graph);

// Per-vertex building blocks, shared with the solver's parallel loops.
// Each sums only the edges that involve the given vertex.
Vec4 grad_p_f_at(int v, const SplitVariables& vars, const PoseGraph& graph);
Vec4 grad_p_g_at(int v, const SplitVariables& vars, const PoseGraph& graph);

// f + g - sum <lambda_i, p_i - q_i> + (beta/2) ||p - q||^2
double augmented_lagrangian(const SplitVariables& vars, const PoseGraph& graph, double beta);

// L_beta + (4/beta) tau2^2 ||q - prev_q||^2 + (4/beta) L_f^2 ||t - prev_t||^2
double merit_phi(const SplitVariables& vars, const PoseGraph& graph, const std::vector<Vec4>& prev_q,
                 const std::vector<Vec3>& prev_t, double beta, double tau2, double L_f);

/*
 * Upper bounds on the gradient Lipschitz constants over the set
 * ||q_i|| <= bound_hint, ||p_i|| = 1. With s1 = sigma_max(sigma1),
 * s2 = sigma_max(sigma2), h = bound_hint and edges e:
 *
 *   L_f_p = max_i sum_{e out of i} 2 s1 |t_ij|^2 h^2
 *   L_g_p = max_j sum_{e into j}   2 s2 h^2
 *   L_f_q = max_i sum_{e out of i} 2 s1 |t_ij|^2
 *   L_g_q = max_i sum_{e out of i} 2 s2
 *   L_f   = max_v sum_{e touching v} 4 s1 (h |t_ij| + |t_ij| + sqrt 2)^2
 *   L_g   = max_v sum_{e touching v} 4 s2 (h + 1)^2
 *
 * The factor 2 is the curvature of a squared norm. L_f and L_g bound the
 * joint Hessian block rows by products of operator norms; residual-size
 * curvature terms are left out, so they are estimates rather than proofs.
 */
LipschitzEstimates lipschitz_estimates(const PoseGraph& graph, double bound_hint = 1.5);

/*
 * Smallest penalty for which the merit function is nonincreasing, times 1.05:
 *
 *   max{ 4/3 (L_f_q + L_g_q),
 *        8 (L_f^2 + L_g^2) / (h1 - L_f_p - L_g_p),
 *        (8 (L_f^2 + L_g^2) + 16 h2^2) / h2,
 *        8 L_f^2 / h3 }
 *
 * h1, h2, h3 are the (scalar) diagonals of H1, H2, H3. Returns 0 when all
 * estimates are zero. Throws std::invalid_argument when h1 <= L_f_p + L_g_p.
 */
double beta_advisor(const LipschitzEstimates& est, double h1, double h2, double h3);

StationarityReport epsilon_stationarity(const SplitVariables& vars, const PoseGraph& graph);

}  // namespace pgo

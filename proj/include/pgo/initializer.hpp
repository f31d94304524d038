#pragma once

#include <vector>

#include <Eigen/Sparse>

#include "pgo/pose_graph.hpp"

namespace pgo {

/*
 * Compose measurements outward from vertex 0 (identity pose). Uses the
 * chain of edges between consecutive ids when it is complete, otherwise a
 * BFS spanning tree. Edges may be walked against their direction.
 * Throws GraphError when the graph is disconnected.
 */
std::vector<Pose> odometry_init(const PoseGraph& graph);

/*
 * Chordal relaxation: rotations solved as unconstrained 3x3 matrices with
 * R_0 = I minimizing sum_e kappa_e |R_j - R_i Rbar_ij|_F^2 (kappa_e =
 * trace(sigma2)/4), projected to the nearest rotation. Translations then
 * come from the weighted linear least-squares problem with those rotations
 * fixed and t_0 = 0. Quaternion signs are then chosen along a BFS tree so
 * that q_j agrees with q_i q_ij. Throws GraphError when the graph is
 * disconnected.
 */
std::vector<Pose> chordal_init(const PoseGraph& graph);

// Rotation-stage normal matrix over vertices 1..n-1 (3 unknowns each, one
// row of R at a time).
Eigen::SparseMatrix<double> chordal_rotation_normal_matrix(const PoseGraph& graph);

}  // namespace pgo

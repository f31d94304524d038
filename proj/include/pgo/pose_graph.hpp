#pragma once

#include <utility>
#include <vector>

#include "pgo/quat.hpp"

namespace pgo {

struct Pose {
    UnitQuaternion q;
    Vec3 t = Vec3::Zero();
};

/*
 * Relative measurement from vertex i to vertex j.
 *
 * sigma1 weights the translation residual [0, t_j - t_i] - q_i [0, t_ij] p_i*
 * and is partitioned as
 *
 *     sigma1 = [ sigma11   sigma12^T ]
 *              [ sigma12   sigma1_hat ]
 *
 * with sigma11 scalar and sigma1_hat 3x3. sigma2 weights the 4-vector
 * rotation residual p_j* q_i q_ij - 1.
 */
struct Edge {
    int i = 0;
    int j = 0;
    UnitQuaternion q_ij;
    Vec3 t_ij = Vec3::Zero();
    Mat4 sigma1 = Mat4::Identity();
    Mat4 sigma2 = Mat4::Identity();

    double sigma11() const { return sigma1(0, 0); }
    Vec3 sigma12() const { return sigma1.block<3, 1>(1, 0); }
    Mat3 sigma1_hat() const { return sigma1.block<3, 3>(1, 1); }
    // sigma1 == diag(a, s, s, s)
    bool sigma1_isotropic() const {
        Mat4 iso = Mat4::Zero();
        iso(0, 0) = sigma1(0, 0);
        iso.diagonal().tail<3>().setConstant(sigma1(1, 1));
        return sigma1 == iso;
    }
    // sigma2 == s I
    bool sigma2_isotropic() const { return sigma2 == sigma2(0, 0) * Mat4::Identity(); }
};

struct PoseGraph {
    int n = 0;
    std::vector<Edge> edges;
    std::vector<std::vector<int>> out_adj;  // edge indices with edge.i == v
    std::vector<std::vector<int>> in_adj;   // edge indices with edge.j == v

    int num_edges() const { return static_cast<int>(edges.size()); }
};

// Fills out_adj/in_adj. Throws GraphError for ids outside [0, n) or i == j.
void build_adjacency(PoseGraph& graph);

// Connected components of the undirected graph, each sorted ascending.
std::vector<std::vector<int>> connected_components(const PoseGraph& graph);

// Symmetric and PSD within 1e-9 (relative to the matrix scale).
bool is_symmetric_psd(const Mat4& m, double tol = 1e-9);

/*
 * Map a g2o 6x6 information matrix (translation block first) to the model
 * weights:
 *   sigma1_hat = translation block, sigma11 = c, sigma12 = 0
 *   sigma2     = mean(diag(rotation block)) * I4
 * Off-diagonal translation/rotation blocks are dropped. Throws
 * std::invalid_argument if info is not symmetric PSD.
 */
std::pair<Mat4, Mat4> info_to_sigmas(const Mat6& info, double c = 1.0);

// Inverse used when writing g2o: block-diagonal, rotation block kappa * I3
// with kappa = trace(sigma2) / 4.
Mat6 sigmas_to_info(const Mat4& sigma1, const Mat4& sigma2);

}  // namespace pgo

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "pgo/pose_graph.hpp"
#include "pgo/vmf.hpp"

namespace pgo {

struct RingSpec {
    int n = 100;
    double radius = 2.0;
    double sigma_r = 0.0;
    double sigma_t = 0.0;
    std::uint64_t seed = 0;
    KappaConvention convention = KappaConvention::InverseVariance;
};

struct CubeSpec {
    int n_hat = 3;
    double p_cube = 0.0;
    double sigma_r = 0.0;
    double sigma_t_rel = 0.0;  // sigma_t = sigma_t_rel / n_hat
    std::uint64_t seed = 0;
    KappaConvention convention = KappaConvention::InverseVariance;
};

struct Dataset {
    std::vector<Pose> truth;
    PoseGraph graph;  // adjacency built
};

/*
 * n poses on a circle of the given radius in the z = 0 plane, centered at
 * the origin, pose k at angle 2 pi k / n facing along the tangent. Edges
 * (k, k+1) and the closure (n-1, 0).
 */
Dataset gen_ring(const RingSpec& spec);

/*
 * Serpentine walk over an n_hat^3 grid scaled into [-1, 1]^3 (rows alternate
 * direction within a layer, odd layers are walked in reverse), so vertex k
 * is the k-th visited node and (k, k+1) are the odometry edges. Every
 * non-path pair of grid neighbours contributes the edges (a, b) and (b, a),
 * each kept independently with probability p_cube. Truth orientations are
 * uniform random rotations drawn from the seed.
 */
Dataset gen_cube(const CubeSpec& spec);

// 2 (2 n^3 - 3 n^2 + 1) p + n^3 - 1
double expected_cube_edges(int n_hat, double p_cube);

/*
 * Fill t_ij, q_ij and the weights of each edge from the truth poses:
 *   t_ij = R_i^T (t_j - t_i) + N(0, sigma_t^2 I)
 *   q_ij = q_i* q_j q_eps,  q_eps ~ vMF(identity, kappa(sigma_r))
 *   sigma1 = diag(1, sigma_t^-2 I3), sigma2 = kappa I4
 * A zero sigma means no noise and unit weight for that part.
 */
void perturb_measurements(const std::vector<Pose>& truth, std::vector<Edge>& edges, double sigma_r, double sigma_t,
                          KappaConvention convention, std::mt19937_64& rng);
void perturb_measurements(const std::vector<Pose>& truth, std::vector<Edge>& edges, double sigma_r, double sigma_t,
                          std::uint64_t seed, KappaConvention convention = KappaConvention::InverseVariance);

}  // namespace pgo

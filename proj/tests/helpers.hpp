#pragma once

#include <random>
#include <vector>

#include "oracles.hpp"
#include "pgo/model.hpp"
#include "pgo/pose_graph.hpp"

namespace testutil {

inline Eigen::Matrix4d random_spd4(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Matrix4d a;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) a(r, c) = n(rng);
    return 0.5 * a * a.transpose() + 0.2 * Eigen::Matrix4d::Identity();
}

// Random multigraph on n vertices with m edges (no self-loops), random
// rotations/translations/weights, adjacency built.
inline pgo::PoseGraph random_graph(std::mt19937_64& rng, int n, int m, bool random_weights = true) {
    std::uniform_int_distribution<int> vid(0, n - 1);
    std::normal_distribution<double> nd(0.0, 1.0);
    pgo::PoseGraph g;
    g.n = n;
    for (int k = 0; k < m; ++k) {
        pgo::Edge e;
        e.i = vid(rng);
        do {
            e.j = vid(rng);
        } while (e.j == e.i);
        e.q_ij = pgo::UnitQuaternion::from_vec(oracle::random_unit4(rng));
        e.t_ij = pgo::Vec3(nd(rng), nd(rng), nd(rng));
        e.sigma1 = random_weights ? random_spd4(rng) : pgo::Mat4::Identity();
        e.sigma2 = random_weights ? random_spd4(rng) : pgo::Mat4::Identity();
        g.edges.push_back(e);
    }
    pgo::build_adjacency(g);
    return g;
}

// Random split variables: unit p, q near p, random t and lambda.
inline pgo::SplitVariables random_vars(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> nd(0.0, 1.0);
    pgo::SplitVariables v;
    for (int k = 0; k < n; ++k) {
        v.p.push_back(pgo::UnitQuaternion::from_vec(oracle::random_unit4(rng)));
        v.q.push_back(v.p.back().vec() + 0.3 * pgo::Vec4(nd(rng), nd(rng), nd(rng), nd(rng)));
        v.t.emplace_back(nd(rng), nd(rng), nd(rng));
        v.lambda.emplace_back(nd(rng), nd(rng), nd(rng), nd(rng));
    }
    return v;
}

inline std::vector<oracle::RawEdge> raw_edges(const pgo::PoseGraph& g) {
    std::vector<oracle::RawEdge> out;
    for (const pgo::Edge& e : g.edges) out.push_back({e.i, e.j, e.q_ij.vec(), e.t_ij, e.sigma1, e.sigma2});
    return out;
}

inline std::vector<Eigen::Vector4d> p_vectors(const pgo::SplitVariables& v) {
    std::vector<Eigen::Vector4d> out;
    for (const auto& p : v.p) out.push_back(p.vec());
    return out;
}

}  // namespace testutil

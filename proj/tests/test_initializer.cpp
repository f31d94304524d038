#include <gtest/gtest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "helpers.hpp"
#include "pgo/errors.hpp"
#include "pgo/initializer.hpp"
#include "pgo/metrics.hpp"
#include "pgo/synth.hpp"

using namespace pgo;

namespace {

void expect_same_up_to_gauge(const std::vector<Pose>& est, const std::vector<Pose>& truth, double rot_tol,
                             double trans_tol) {
    const std::vector<Pose> a = align_to_truth(est, truth, AlignMode::Anchor0);
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_LE((a[k].q.vec() - truth[k].q.vec()).norm(), rot_tol) << "vertex " << k;
        EXPECT_LE((a[k].t - truth[k].t).norm(), trans_tol) << "vertex " << k;
    }
}

}  // namespace

TEST(OdometryInit, ExactOnNoiselessChain) {
    RingSpec spec;
    spec.n = 10;
    const Dataset ds = gen_ring(spec);
    const std::vector<Pose> init = odometry_init(ds.graph);
    EXPECT_DOUBLE_EQ(init[0].q.w(), 1.0);
    EXPECT_EQ(init[0].t, Vec3::Zero());
    expect_same_up_to_gauge(init, ds.truth, 1e-12, 1e-12);
}

TEST(OdometryInit, SpanningTreeWithReversedEdges) {
    // Only edges pointing towards vertex 0: every step walks an edge backwards.
    CubeSpec spec;
    spec.n_hat = 2;
    const Dataset ref = gen_cube(spec);
    PoseGraph g;
    g.n = ref.graph.n;
    for (const Edge& e : ref.graph.edges) {
        Edge r = e;
        std::swap(r.i, r.j);
        r.q_ij = e.q_ij.conj();
        r.t_ij = -rotate_vec(e.q_ij.conj(), e.t_ij);
        g.edges.push_back(r);
    }
    build_adjacency(g);
    expect_same_up_to_gauge(odometry_init(g), ref.truth, 1e-12, 1e-12);
}

TEST(OdometryInit, SingleVertex) {
    PoseGraph g;
    g.n = 1;
    build_adjacency(g);
    const auto init = odometry_init(g);
    ASSERT_EQ(init.size(), 1u);
    EXPECT_DOUBLE_EQ(init[0].q.w(), 1.0);
}

TEST(Initializers, DisconnectedGraphThrows) {
    PoseGraph g;
    g.n = 4;
    Edge a, b;
    a.i = 0;
    a.j = 1;
    b.i = 2;
    b.j = 3;
    g.edges = {a, b};
    build_adjacency(g);
    EXPECT_THROW(odometry_init(g), GraphError);
    EXPECT_THROW(chordal_init(g), GraphError);
}

TEST(ChordalInit, NoiselessRecovery) {
    CubeSpec spec;
    spec.n_hat = 3;
    spec.p_cube = 0.5;
    spec.seed = 2;
    const Dataset ds = gen_cube(spec);
    expect_same_up_to_gauge(chordal_init(ds.graph), ds.truth, 1e-8, 1e-6);
}

TEST(ChordalInit, SignsFollowMeasurements) {
    CubeSpec spec;
    spec.n_hat = 3;
    spec.p_cube = 0.3;
    spec.sigma_r = 0.05;
    const Dataset ds = gen_cube(spec);
    const auto init = chordal_init(ds.graph);
    // along the odometry chain q_j agrees in sign with q_i q_ij
    for (int k = 0; k + 1 < ds.graph.n; ++k) EXPECT_GT(qdot(init[k + 1].q, init[k].q * ds.graph.edges[k].q_ij), 0.0);
}

TEST(ChordalInit, BeatsOdometryOnNoisyRing) {
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        RingSpec spec;
        spec.n = 100;
        spec.sigma_r = 0.03;
        spec.sigma_t = 0.1;
        spec.seed = seed;
        const Dataset ds = gen_ring(spec);
        const double c = aligned_rel_err(chordal_init(ds.graph), ds.truth);
        const double o = aligned_rel_err(odometry_init(ds.graph), ds.truth);
        if (c < o) ++wins;
    }
    EXPECT_EQ(wins, 5);
}

TEST(ChordalInit, NormalMatrixPositiveDefinite) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + trial % 6;
        // chain plus random extras keeps the graph connected
        PoseGraph g = testutil::random_graph(rng, n, n);
        for (int k = 0; k + 1 < n; ++k) {
            Edge e = g.edges[0];
            e.i = k;
            e.j = k + 1;
            g.edges.push_back(e);
        }
        build_adjacency(g);
        const Eigen::MatrixXd a(chordal_rotation_normal_matrix(g));
        EXPECT_EQ(a.rows(), 3 * (n - 1));
        EXPECT_LE((a - a.transpose()).norm(), 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
        EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
    }
}

TEST(ChordalInit, Deterministic) {
    CubeSpec spec;
    spec.n_hat = 3;
    spec.p_cube = 0.3;
    spec.sigma_r = 0.1;
    spec.sigma_t_rel = 0.1;
    const Dataset ds = gen_cube(spec);
    const auto a = chordal_init(ds.graph);
    const auto b = chordal_init(ds.graph);
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a[k].q.vec(), b[k].q.vec());
        EXPECT_EQ(a[k].t, b[k].t);
    }
}

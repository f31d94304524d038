#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

#include "helpers.hpp"
#include "pgo/errors.hpp"
#include "pgo/g2o.hpp"
#include "pgo/pose_graph.hpp"

using namespace pgo;

namespace {

PoseGraph graph_from_pairs(int n, const std::vector<std::pair<int, int>>& pairs) {
    PoseGraph g;
    g.n = n;
    for (auto [i, j] : pairs) {
        Edge e;
        e.i = i;
        e.j = j;
        g.edges.push_back(e);
    }
    build_adjacency(g);
    return g;
}

const char* kTwoVertex =
    "VERTEX_SE3:QUAT 0 0 0 0 0 0 0 1\n"
    "VERTEX_SE3:QUAT 1 1 0 0 0 0 0 1\n"
    "EDGE_SE3:QUAT 0 1 1 0 0 0 0 0 1 1 0 0 0 0 0 1 0 0 0 0 1 0 0 0 1 0 0 1 0 1\n";

}  // namespace

TEST(Adjacency, ThreeCycle) {
    const PoseGraph g = graph_from_pairs(3, {{0, 1}, {1, 2}, {2, 0}});
    for (int v = 0; v < 3; ++v) {
        EXPECT_EQ(g.out_adj[v].size(), 1u);
        EXPECT_EQ(g.in_adj[v].size(), 1u);
    }
    EXPECT_EQ(g.out_adj[0][0], 0);
    EXPECT_EQ(g.in_adj[0][0], 2);
}

TEST(Adjacency, EmptyAndDuplicates) {
    const PoseGraph empty = graph_from_pairs(4, {});
    for (int v = 0; v < 4; ++v) {
        EXPECT_TRUE(empty.out_adj[v].empty());
        EXPECT_TRUE(empty.in_adj[v].empty());
    }
    const PoseGraph dup = graph_from_pairs(2, {{0, 1}, {0, 1}});
    EXPECT_EQ(dup.out_adj[0].size(), 2u);
    EXPECT_EQ(dup.in_adj[1].size(), 2u);
}

TEST(Adjacency, RejectsBadIds) {
    EXPECT_THROW(graph_from_pairs(2, {{0, 2}}), GraphError);
    EXPECT_THROW(graph_from_pairs(2, {{-1, 0}}), GraphError);
    EXPECT_THROW(graph_from_pairs(2, {{1, 1}}), GraphError);
}

TEST(Adjacency, PartitionPropertyOnRandomGraphs) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + trial % 9;
        const PoseGraph g = testutil::random_graph(rng, n, 3 * n);
        std::vector<int> out_seen, in_seen;
        for (int v = 0; v < n; ++v) {
            for (int e : g.out_adj[v]) {
                EXPECT_EQ(g.edges[e].i, v);
                out_seen.push_back(e);
            }
            for (int e : g.in_adj[v]) {
                EXPECT_EQ(g.edges[e].j, v);
                in_seen.push_back(e);
            }
            // in and out sets of a vertex are disjoint (no self-loops)
            for (int e : g.out_adj[v]) EXPECT_EQ(std::count(g.in_adj[v].begin(), g.in_adj[v].end(), e), 0);
        }
        std::sort(out_seen.begin(), out_seen.end());
        std::sort(in_seen.begin(), in_seen.end());
        std::vector<int> all(g.edges.size());
        for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<int>(k);
        EXPECT_EQ(out_seen, all);
        EXPECT_EQ(in_seen, all);
    }
}

TEST(Components, SplitsDisconnectedGraph) {
    const PoseGraph g = graph_from_pairs(5, {{0, 1}, {3, 2}});
    const auto comps = connected_components(g);
    ASSERT_EQ(comps.size(), 3u);
    EXPECT_EQ(comps[0], (std::vector<int>{0, 1}));
    EXPECT_EQ(comps[1], (std::vector<int>{2, 3}));
    EXPECT_EQ(comps[2], (std::vector<int>{4}));
}

TEST(EdgeAccessors, PartitionOfSigma1) {
    Edge e;
    e.sigma1 << 2, 0.1, 0.2, 0.3, 0.1, 5, 0, 0, 0.2, 0, 6, 0, 0.3, 0, 0, 7;
    EXPECT_DOUBLE_EQ(e.sigma11(), 2.0);
    EXPECT_EQ(e.sigma12(), Vec3(0.1, 0.2, 0.3));
    EXPECT_EQ(e.sigma1_hat(), Vec3(5, 6, 7).asDiagonal().toDenseMatrix());
    EXPECT_FALSE(e.sigma1_isotropic());
    e.sigma1 = Vec4(2, 5, 5, 5).asDiagonal();
    EXPECT_TRUE(e.sigma1_isotropic());
    e.sigma2 = 3.0 * Mat4::Identity();
    EXPECT_TRUE(e.sigma2_isotropic());
    e.sigma2(1, 2) = e.sigma2(2, 1) = 0.1;
    EXPECT_FALSE(e.sigma2_isotropic());
}

TEST(SymmetricPsd, Detects) {
    EXPECT_TRUE(is_symmetric_psd(Mat4::Identity()));
    Mat4 a = Mat4::Identity();
    a(0, 1) = 0.5;
    EXPECT_FALSE(is_symmetric_psd(a));
    EXPECT_FALSE(is_symmetric_psd(-Mat4::Identity()));
}

TEST(InfoToSigmas, IdentityInfo) {
    const auto [s1, s2] = info_to_sigmas(Mat6::Identity());
    EXPECT_EQ(s1, Mat4::Identity());
    EXPECT_EQ(s2, Mat4::Identity());
}

TEST(InfoToSigmas, MeanRuleAndTranslationBlock) {
    Mat6 info = Mat6::Zero();
    Mat3 a;
    a << 4, 1, 0, 1, 5, 2, 0, 2, 6;
    info.block<3, 3>(0, 0) = a;
    info.block<3, 3>(3, 3) = Vec3(2, 4, 6).asDiagonal();
    const auto [s1, s2] = info_to_sigmas(info, 3.0);
    EXPECT_EQ((s1.block<3, 3>(1, 1)), a);
    EXPECT_DOUBLE_EQ(s1(0, 0), 3.0);
    EXPECT_EQ((s1.block<3, 1>(1, 0)), Vec3::Zero());
    EXPECT_EQ(s2, 4.0 * Mat4::Identity());
}

TEST(InfoToSigmas, RejectsNonPsd) {
    Mat6 info = Mat6::Identity();
    info(2, 2) = -1.0;
    EXPECT_THROW(info_to_sigmas(info), std::invalid_argument);
    Mat6 asym = Mat6::Identity();
    asym(0, 1) = 0.5;
    EXPECT_THROW(info_to_sigmas(asym), std::invalid_argument);
}

TEST(G2o, TwoVertexFile) {
    std::istringstream in(kTwoVertex);
    const G2oData d = read_g2o(in);
    EXPECT_EQ(d.graph.n, 2);
    ASSERT_EQ(d.graph.num_edges(), 1);
    const Edge& e = d.graph.edges[0];
    EXPECT_EQ(e.sigma1, Mat4::Identity());
    EXPECT_EQ(e.sigma2, Mat4::Identity());
    EXPECT_EQ(e.t_ij, Vec3(1, 0, 0));
    EXPECT_EQ(d.poses[1].t, Vec3(1, 0, 0));
    EXPECT_DOUBLE_EQ(d.poses[1].q.w(), 1.0);
    EXPECT_FALSE(d.dropped_cross_information);
}

TEST(G2o, QuaternionOrderConverted) {
    std::istringstream in("VERTEX_SE3:QUAT 7 1 2 3 0.5 0.5 0.5 0.5\nVERTEX_SE3:QUAT 9 0 0 0 1 0 0 0\n");
    const G2oData d = read_g2o(in);
    EXPECT_EQ(d.original_ids, (std::vector<long long>{7, 9}));
    EXPECT_EQ(d.poses[1].q.vec(), Vec4(0, 1, 0, 0));
}

TEST(G2o, CommentsUnknownTagsAndRenormalization) {
    std::istringstream in(
        "# header\n\nFIX 0\nVERTEX_SE3:QUAT 0 0 0 0 0 0 0 2\nVERTEX_SE3:QUAT 1 0 0 0 0 0 0 1\nPARAMS_X 1 2\n");
    const G2oData d = read_g2o(in);
    EXPECT_EQ(d.skipped_lines, 2);
    EXPECT_EQ(d.renormalized_quaternions, 1);
    EXPECT_NEAR(d.poses[0].q.vec().norm(), 1.0, 1e-15);
}

TEST(G2o, ErrorsCarryLineNumbers) {
    auto line_of = [](const std::string& text) {
        std::istringstream in(text);
        try {
            read_g2o(in);
        } catch (const ParseError& e) {
            return e.line();
        }
        return -1;
    };
    EXPECT_EQ(line_of("VERTEX_SE3:QUAT 0 0 0 0 0 0 0 1\nVERTEX_SE3:QUAT 1 0 0 zz 0 0 0 1\n"), 2);
    EXPECT_EQ(line_of("VERTEX_SE3:QUAT 0 0 0 0 0 0 0 1\nVERTEX_SE3:QUAT 0 0 0 0 0 0 0 1\n"), 2);
    // edge to a vertex that does not exist
    EXPECT_EQ(line_of("VERTEX_SE3:QUAT 0 0 0 0 0 0 0 1\n# c\nEDGE_SE3:QUAT 0 5 1 0 0 0 0 0 1 1 0 0 0 0 0 1 0 0 0 0 "
                      "1 0 0 0 1 0 0 1 0 1\n"),
              3);
    EXPECT_EQ(line_of("VERTEX_SE3:QUAT 0 0 0 0 0 0 0 1\nVERTEX_SE3:QUAT 1 0 0 0 0 0 0 1\nEDGE_SE3:QUAT 0 1 1 0 0\n"), 3);
}

TEST(G2o, MissingFile) { EXPECT_THROW(load_g2o("/nonexistent/file.g2o"), Error); }

TEST(G2o, FixtureRoundTrip) {
    const G2oData a = load_g2o(std::string(PGO_FIXTURE_DIR) + "/graph50.g2o");
    EXPECT_EQ(a.graph.n, 50);
    EXPECT_EQ(a.graph.num_edges(), 90);
    EXPECT_TRUE(a.dropped_cross_information);
    for (const Edge& e : a.graph.edges) {
        EXPECT_NEAR(e.q_ij.vec().norm(), 1.0, 1e-12);
        EXPECT_TRUE(is_symmetric_psd(e.sigma1));
        EXPECT_TRUE(is_symmetric_psd(e.sigma2));
    }
    std::stringstream buf;
    write_g2o(buf, a.graph, a.poses, a.original_ids);
    const G2oData b = read_g2o(buf);
    ASSERT_EQ(b.graph.n, a.graph.n);
    ASSERT_EQ(b.graph.num_edges(), a.graph.num_edges());
    EXPECT_EQ(b.original_ids, a.original_ids);
    for (int v = 0; v < a.graph.n; ++v) {
        EXPECT_LE((a.poses[v].t - b.poses[v].t).norm(), 1e-9);
        EXPECT_LE((a.poses[v].q.vec() - b.poses[v].q.vec()).norm(), 1e-9);
    }
    for (int k = 0; k < a.graph.num_edges(); ++k) {
        const Edge &x = a.graph.edges[k], &y = b.graph.edges[k];
        EXPECT_EQ(x.i, y.i);
        EXPECT_EQ(x.j, y.j);
        EXPECT_LE((x.t_ij - y.t_ij).norm(), 1e-9);
        EXPECT_LE((x.q_ij.vec() - y.q_ij.vec()).norm(), 1e-9);
        EXPECT_LE((x.sigma1 - y.sigma1).norm(), 1e-9 * x.sigma1.norm());
        EXPECT_LE((x.sigma2 - y.sigma2).norm(), 1e-9 * x.sigma2.norm());
    }
    EXPECT_FALSE(b.dropped_cross_information);
}

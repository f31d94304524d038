#include "pgo/initializer.hpp"

#include <algorithm>
#include <cstdlib>
#include <queue>
#include <sstream>

#include "pgo/errors.hpp"

namespace pgo {

namespace {

void require_connected(const PoseGraph& graph) {
    const auto comps = connected_components(graph);
    if (comps.size() <= 1) return;
    std::ostringstream msg;
    msg << "graph is disconnected (" << comps.size() << " components):";
    for (const auto& c : comps) {
        msg << " {";
        for (std::size_t k = 0; k < c.size() && k < 8; ++k) msg << (k ? "," : "") << c[k];
        if (c.size() > 8) msg << ",... (" << c.size() << " vertices)";
        msg << "}";
    }
    throw GraphError(msg.str());
}

// Pose of the far end of edge e given the pose of the near end.
Pose compose(const Edge& e, const Pose& from, bool forward) {
    Pose out;
    if (forward) {
        out.q = from.q * e.q_ij;
        out.t = from.t + rotate_vec(from.q, e.t_ij);
    } else {
        out.q = from.q * e.q_ij.conj();
        out.t = from.t - rotate_vec(out.q, e.t_ij);
    }
    return out;
}

// Per-vertex parent edge along the consecutive-id chain, or empty if a link is missing.
std::vector<int> chain_edges(const PoseGraph& graph) {
    std::vector<int> link(static_cast<std::size_t>(std::max(graph.n - 1, 0)), -1);
    for (int k = 0; k < graph.num_edges(); ++k) {
        const Edge& e = graph.edges[static_cast<std::size_t>(k)];
        const int lo = std::min(e.i, e.j);
        if (std::abs(e.i - e.j) == 1 && link[static_cast<std::size_t>(lo)] < 0) link[static_cast<std::size_t>(lo)] = k;
    }
    for (int l : link)
        if (l < 0) return {};
    return link;
}

// The objective compares quaternions, not rotations, so each q_v is flipped
// to agree in sign with q_parent q_e along a BFS tree from vertex 0.
void synchronize_signs(const PoseGraph& graph, std::vector<Pose>& poses) {
    std::vector<bool> seen(static_cast<std::size_t>(graph.n), false);
    std::queue<int> todo;
    todo.push(0);
    seen[0] = true;
    auto visit = [&](int child, const Quaternion& predicted) {
        Pose& p = poses[static_cast<std::size_t>(child)];
        if (qdot(p.q, predicted) < 0.0) p.q = -p.q;
        seen[static_cast<std::size_t>(child)] = true;
        todo.push(child);
    };
    while (!todo.empty()) {
        const int v = todo.front();
        todo.pop();
        const auto vi = static_cast<std::size_t>(v);
        for (int k : graph.out_adj[vi]) {
            const Edge& e = graph.edges[static_cast<std::size_t>(k)];
            if (!seen[static_cast<std::size_t>(e.j)]) visit(e.j, qmul(poses[vi].q, e.q_ij));
        }
        for (int k : graph.in_adj[vi]) {
            const Edge& e = graph.edges[static_cast<std::size_t>(k)];
            if (!seen[static_cast<std::size_t>(e.i)]) visit(e.i, qmul(poses[vi].q, qconj(e.q_ij)));
        }
    }
}

}  // namespace

std::vector<Pose> odometry_init(const PoseGraph& graph) {
    std::vector<Pose> poses(static_cast<std::size_t>(graph.n));
    if (graph.n == 0) return poses;
    require_connected(graph);

    const std::vector<int> chain = chain_edges(graph);
    if (!chain.empty() || graph.n == 1) {
        for (int v = 1; v < graph.n; ++v) {
            const Edge& e = graph.edges[static_cast<std::size_t>(chain[static_cast<std::size_t>(v - 1)])];
            poses[static_cast<std::size_t>(v)] = compose(e, poses[static_cast<std::size_t>(v - 1)], e.i == v - 1);
        }
        return poses;
    }

    std::vector<bool> seen(static_cast<std::size_t>(graph.n), false);
    std::queue<int> todo;
    todo.push(0);
    seen[0] = true;
    while (!todo.empty()) {
        const int v = todo.front();
        todo.pop();
        const auto vi = static_cast<std::size_t>(v);
        for (int k : graph.out_adj[vi]) {
            const Edge& e = graph.edges[static_cast<std::size_t>(k)];
            if (seen[static_cast<std::size_t>(e.j)]) continue;
            seen[static_cast<std::size_t>(e.j)] = true;
            poses[static_cast<std::size_t>(e.j)] = compose(e, poses[vi], true);
            todo.push(e.j);
        }
        for (int k : graph.in_adj[vi]) {
            const Edge& e = graph.edges[static_cast<std::size_t>(k)];
            if (seen[static_cast<std::size_t>(e.i)]) continue;
            seen[static_cast<std::size_t>(e.i)] = true;
            poses[static_cast<std::size_t>(e.i)] = compose(e, poses[vi], false);
            todo.push(e.i);
        }
    }
    return poses;
}

Eigen::SparseMatrix<double> chordal_rotation_normal_matrix(const PoseGraph& graph) {
    const int dim = 3 * (graph.n - 1);
    std::vector<Eigen::Triplet<double>> trip;
    for (const Edge& e : graph.edges) {
        // residual y_j - C y_i with C = Rbar^T, y = one row of R as a column
        const double w = e.sigma2.trace() / 4.0;
        const Mat3 c = to_rotation_matrix(e.q_ij).transpose();
        const int bi = 3 * (e.i - 1);
        const int bj = 3 * (e.j - 1);
        for (int r = 0; r < 3; ++r) {
            if (e.j > 0) trip.emplace_back(bj + r, bj + r, w);
            if (e.i > 0) trip.emplace_back(bi + r, bi + r, w);  // C^T C = I
            for (int s = 0; s < 3; ++s) {
                if (e.i > 0 && e.j > 0) {
                    trip.emplace_back(bj + r, bi + s, -w * c(r, s));
                    trip.emplace_back(bi + s, bj + r, -w * c(r, s));
                }
            }
        }
    }
    Eigen::SparseMatrix<double> h(dim, dim);
    h.setFromTriplets(trip.begin(), trip.end());
    return h;
}

std::vector<Pose> chordal_init(const PoseGraph& graph) {
    std::vector<Pose> poses(static_cast<std::size_t>(graph.n));
    if (graph.n <= 1) return poses;
    require_connected(graph);
    const int dim = 3 * (graph.n - 1);

    // Rotation stage: one factorization, three right-hand sides (rows of R).
    const Eigen::SparseMatrix<double> h = chordal_rotation_normal_matrix(graph);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(dim, 3);
    for (const Edge& e : graph.edges) {
        const double w = e.sigma2.trace() / 4.0;
        const Mat3 c = to_rotation_matrix(e.q_ij).transpose();
        // y_0 = e_a is fixed; move its terms to the right-hand side
        if (e.i == 0 && e.j > 0) rhs.middleRows<3>(3 * (e.j - 1)) += w * c;
        if (e.j == 0 && e.i > 0) rhs.middleRows<3>(3 * (e.i - 1)) += w * c.transpose();
    }
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> rot(h);
    if (rot.info() != Eigen::Success) throw NumericalError("chordal rotation system could not be factorized");
    const Eigen::MatrixXd rows = rot.solve(rhs);
    for (int v = 1; v < graph.n; ++v) {
        const Mat3 r = rows.middleRows<3>(3 * (v - 1)).transpose();
        poses[static_cast<std::size_t>(v)].q = from_rotation_matrix(r);
    }
    synchronize_signs(graph, poses);

    // Translation stage: min sum |t_j - t_i - R_i t_ij|^2 over sigma1_hat with t_0 = 0.
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
    for (int k = 0; k < dim; ++k) trip.emplace_back(k, k, 1e-8);
    for (const Edge& e : graph.edges) {
        const Mat3 s = e.sigma1_hat();
        const Vec3 d = s * rotate_vec(poses[static_cast<std::size_t>(e.i)].q, e.t_ij);
        const int bi = 3 * (e.i - 1);
        const int bj = 3 * (e.j - 1);
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                if (e.i > 0) trip.emplace_back(bi + r, bi + c, s(r, c));
                if (e.j > 0) trip.emplace_back(bj + r, bj + c, s(r, c));
                if (e.i > 0 && e.j > 0) {
                    trip.emplace_back(bi + r, bj + c, -s(r, c));
                    trip.emplace_back(bj + r, bi + c, -s(r, c));
                }
            }
        }
        if (e.j > 0) b.segment<3>(bj) += d;
        if (e.i > 0) b.segment<3>(bi) -= d;
    }
    Eigen::SparseMatrix<double> a(dim, dim);
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> trans(a);
    if (trans.info() != Eigen::Success) throw NumericalError("chordal translation system could not be factorized");
    const Eigen::VectorXd t = trans.solve(b);
    for (int v = 1; v < graph.n; ++v) poses[static_cast<std::size_t>(v)].t = t.segment<3>(3 * (v - 1));
    return poses;
}

}  // namespace pgo

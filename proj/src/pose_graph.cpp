#include "pgo/pose_graph.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <string>

#include "pgo/errors.hpp"
#include "pgo/sym_eigen.hpp"

namespace pgo {

void build_adjacency(PoseGraph& graph) {
    if (graph.n < 0) throw GraphError("negative vertex count");
    graph.out_adj.assign(static_cast<std::size_t>(graph.n), {});
    graph.in_adj.assign(static_cast<std::size_t>(graph.n), {});
    for (int e = 0; e < graph.num_edges(); ++e) {
        const Edge& edge = graph.edges[static_cast<std::size_t>(e)];
        if (edge.i < 0 || edge.i >= graph.n || edge.j < 0 || edge.j >= graph.n)
            throw GraphError("edge " + std::to_string(e) + " references vertex outside [0, " +
                             std::to_string(graph.n) + ")");
        if (edge.i == edge.j) throw GraphError("edge " + std::to_string(e) + " is a self-loop");
        graph.out_adj[static_cast<std::size_t>(edge.i)].push_back(e);
        graph.in_adj[static_cast<std::size_t>(edge.j)].push_back(e);
    }
}

std::vector<std::vector<int>> connected_components(const PoseGraph& graph) {
    std::vector<std::vector<int>> nbr(static_cast<std::size_t>(graph.n));
    for (const Edge& e : graph.edges) {
        nbr[static_cast<std::size_t>(e.i)].push_back(e.j);
        nbr[static_cast<std::size_t>(e.j)].push_back(e.i);
    }
    std::vector<int> label(static_cast<std::size_t>(graph.n), -1);
    std::vector<std::vector<int>> comps;
    for (int s = 0; s < graph.n; ++s) {
        if (label[static_cast<std::size_t>(s)] >= 0) continue;
        const int id = static_cast<int>(comps.size());
        comps.emplace_back();
        std::queue<int> todo;
        todo.push(s);
        label[static_cast<std::size_t>(s)] = id;
        while (!todo.empty()) {
            const int v = todo.front();
            todo.pop();
            comps.back().push_back(v);
            for (int w : nbr[static_cast<std::size_t>(v)]) {
                if (label[static_cast<std::size_t>(w)] < 0) {
                    label[static_cast<std::size_t>(w)] = id;
                    todo.push(w);
                }
            }
        }
        std::sort(comps.back().begin(), comps.back().end());
    }
    return comps;
}

bool is_symmetric_psd(const Mat4& m, double tol) {
    if (!m.allFinite()) return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale) return false;
    return min_eigenvalue<4>(m) >= -tol * scale;
}

std::pair<Mat4, Mat4> info_to_sigmas(const Mat6& info, double c) {
    const double scale = std::max(1.0, info.cwiseAbs().maxCoeff());
    if (!info.allFinite() || (info - info.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw std::invalid_argument("information matrix is not symmetric");
    if (min_eigenvalue<6>(info) < -1e-9 * scale)
        throw std::invalid_argument("information matrix is not positive semidefinite");

    Mat4 s1 = Mat4::Zero();
    s1(0, 0) = c;
    s1.block<3, 3>(1, 1) = 0.5 * (info.block<3, 3>(0, 0) + info.block<3, 3>(0, 0).transpose());
    const double kappa = info.block<3, 3>(3, 3).diagonal().mean();
    const Mat4 s2 = kappa * Mat4::Identity();
    return {s1, s2};
}

Mat6 sigmas_to_info(const Mat4& sigma1, const Mat4& sigma2) {
    Mat6 info = Mat6::Zero();
    info.block<3, 3>(0, 0) = sigma1.block<3, 3>(1, 1);
    info.block<3, 3>(3, 3) = (sigma2.trace() / 4.0) * Mat3::Identity();
    return info;
}

}  // namespace pgo

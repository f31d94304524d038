#include "pgo/manifold_ls.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include <omp.h>

#include "pgo/errors.hpp"
#include "pgo/sym_eigen.hpp"

namespace pgo {

namespace {

using Mat43 = Eigen::Matrix<double, 4, 3>;
using Mat33 = Eigen::Matrix<double, 3, 3>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

struct EdgeWeights {
    Mat3 l1;  // sqrt(sigma1_hat)
    Mat4 l2;  // sqrt(sigma2)
};

std::vector<EdgeWeights> edge_weights(const PoseGraph& graph) {
    std::vector<EdgeWeights> w(graph.edges.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        w[k].l1 = psd_sqrt<3>(graph.edges[k].sigma1_hat());
        w[k].l2 = psd_sqrt<4>(graph.edges[k].sigma2);
    }
    return w;
}

// Tangent basis at q: q (0, e_k), k = 1..3.
Mat43 tangent_basis(const UnitQuaternion& q) { return mat_M(q).rightCols<3>(); }

struct EdgeBlock {
    Eigen::Matrix<double, 7, 1> r;
    Eigen::Matrix<double, 3, 3> dt_rot_i;  // translation rows wrt rotation of i
    Eigen::Matrix<double, 4, 3> dr_rot_i;  // rotation rows wrt rotation of i
    Eigen::Matrix<double, 4, 3> dr_rot_j;  // rotation rows wrt rotation of j
    Mat3 l1;                               // translation rows wrt t_j (and -t_i)
};

EdgeBlock edge_block(const Edge& e, const EdgeWeights& w, const Pose& pi, const Pose& pj) {
    EdgeBlock b;
    const Quaternion tq = Quaternion::pure(e.t_ij);
    const Vec3 v = pj.t - pi.t - rotate_vec(pi.q, e.t_ij);
    const Quaternion u = qmul(qmul(qconj(pj.q), pi.q), e.q_ij) - Quaternion::identity();
    b.r.head<3>() = w.l1 * v;
    b.r.tail<4>() = w.l2 * u.vec();

    const Mat43 bi = tangent_basis(pi.q);
    const Mat43 bj = tangent_basis(pj.q);
    const Mat4 ds = mat_W(qmul(tq, qconj(pi.q))) + mat_M(qmul(pi.q, tq)) * mat_D();
    b.dt_rot_i = -w.l1 * (ds.bottomRows<3>() * bi);
    b.dr_rot_i = w.l2 * (mat_W(e.q_ij) * mat_M(pj.q).transpose() * bi);
    b.dr_rot_j = w.l2 * (mat_W(qmul(pi.q, e.q_ij)) * mat_D() * bj);
    b.l1 = w.l1;
    return b;
}

ResidualSystem assemble(const std::vector<Pose>& poses, const PoseGraph& graph,
                        const std::vector<EdgeWeights>& weights, int threads) {
    const int m = graph.num_edges();
    std::vector<EdgeBlock> blocks(static_cast<std::size_t>(m));
    const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
    for (int k = 0; k < m; ++k) {
        const Edge& e = graph.edges[static_cast<std::size_t>(k)];
        blocks[static_cast<std::size_t>(k)] =
            edge_block(e, weights[static_cast<std::size_t>(k)], poses[static_cast<std::size_t>(e.i)],
                       poses[static_cast<std::size_t>(e.j)]);
    }

    ResidualSystem sys;
    sys.r.resize(7 * m);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(m) * 60);
    for (int k = 0; k < m; ++k) {
        const Edge& e = graph.edges[static_cast<std::size_t>(k)];
        const EdgeBlock& b = blocks[static_cast<std::size_t>(k)];
        const int row = 7 * k;
        const int ci = 6 * e.i;
        const int cj = 6 * e.j;
        sys.r.segment<7>(row) = b.r;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                trip.emplace_back(row + r, ci + c, b.dt_rot_i(r, c));
                trip.emplace_back(row + r, ci + 3 + c, -b.l1(r, c));
                trip.emplace_back(row + r, cj + 3 + c, b.l1(r, c));
            }
        }
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 3; ++c) {
                trip.emplace_back(row + 3 + r, ci + c, b.dr_rot_i(r, c));
                trip.emplace_back(row + 3 + r, cj + c, b.dr_rot_j(r, c));
            }
        }
    }
    sys.J.resize(7 * m, 6 * graph.n);
    sys.J.setFromTriplets(trip.begin(), trip.end());
    sys.J.makeCompressed();
    return sys;
}

double translation_cost(const ResidualSystem& sys) {
    double s = 0.0;
    for (Eigen::Index k = 0; k + 7 <= sys.r.size(); k += 7) s += sys.r.segment<3>(k).squaredNorm();
    return s;
}

IterationRecord record(int iter, double time_s, const ResidualSystem& sys, double rel_decrease) {
    IterationRecord rec;
    rec.iter = iter;
    rec.time_s = time_s;
    rec.f = translation_cost(sys);
    rec.g = sys.cost() - rec.f;
    rec.lagrangian = sys.cost();
    rec.phi = sys.cost();
    rec.residual = rel_decrease;
    return rec;
}

std::vector<Pose> apply_step(const std::vector<Pose>& poses, const Eigen::VectorXd& delta) {
    std::vector<Pose> out(poses.size());
    for (std::size_t v = 0; v < poses.size(); ++v) out[v] = retract(poses[v], delta.segment<6>(6 * static_cast<Eigen::Index>(v)));
    return out;
}

enum class Method { GaussNewton, LevenbergMarquardt };

LsResult run(Method method, const PoseGraph& graph, const std::vector<Pose>& init, const LsParams& params,
             const LsCallback& callback) {
    if (static_cast<int>(init.size()) != graph.n)
        throw std::invalid_argument("initial pose count does not match vertex count");
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

    const auto weights = edge_weights(graph);
    LsResult res;
    res.poses = init;
    ResidualSystem sys = assemble(res.poses, graph, weights, params.threads);
    res.history.push_back(record(0, elapsed(), sys, 0.0));
    if (callback) callback(res.history.back(), res.poses);

    double lambda = method == Method::LevenbergMarquardt ? params.lm_lambda0 : 0.0;
    res.status = LsStatus::MaxIterations;
    while (res.iterations < params.max_iter) {
        const double cost = sys.cost();
        if (cost <= 1e-28 || graph.n <= 1) {
            res.status = LsStatus::Converged;
            break;
        }
        Eigen::VectorXd delta;
        try {
            delta = damped_step(sys, lambda);
        } catch (const NumericalError&) {
            if (method == Method::GaussNewton)
                throw NumericalError("Gauss-Newton normal equations are singular; try Levenberg-Marquardt");
            lambda *= params.lm_up;
            if (lambda > 1e12) {
                res.status = LsStatus::Stalled;
                break;
            }
            continue;
        }
        std::vector<Pose> trial = apply_step(res.poses, delta);
        ResidualSystem trial_sys = assemble(trial, graph, weights, params.threads);
        const double new_cost = trial_sys.cost();
        if (!std::isfinite(new_cost)) throw SolverDiverged("non-finite cost in least-squares iteration");

        if (new_cost >= cost) {
            if (method == Method::GaussNewton) {
                res.status = LsStatus::CostIncreased;
                break;
            }
            lambda *= params.lm_up;
            if (lambda > 1e12) {
                res.status = LsStatus::Stalled;
                break;
            }
            continue;
        }

        res.poses = std::move(trial);
        sys = std::move(trial_sys);
        ++res.iterations;
        const double rel = new_cost > 0.0 ? (cost - new_cost) / new_cost : 0.0;
        res.history.push_back(record(res.iterations, elapsed(), sys, rel));
        if (callback) callback(res.history.back(), res.poses);
        if (method == Method::LevenbergMarquardt) lambda *= params.lm_down;
        if (rel < params.tol || new_cost <= 1e-28) {
            res.status = LsStatus::Converged;
            break;
        }
    }
    res.final_lambda = lambda;
    return res;
}

}  // namespace

ResidualSystem build_residuals(const std::vector<Pose>& poses, const PoseGraph& graph) {
    if (static_cast<int>(poses.size()) != graph.n) throw std::invalid_argument("pose count does not match vertex count");
    return assemble(poses, graph, edge_weights(graph), 1);
}

Pose retract(const Pose& pose, const Eigen::Matrix<double, 6, 1>& delta) {
    Pose out;
    out.q = UnitQuaternion(qmul(pose.q, Quaternion(1.0, delta(0), delta(1), delta(2))));
    out.t = pose.t + delta.tail<3>();
    return out;
}

std::string to_string(LsStatus status) {
    switch (status) {
        case LsStatus::Converged: return "converged";
        case LsStatus::MaxIterations: return "max_iter";
        case LsStatus::Stalled: return "stalled";
        case LsStatus::CostIncreased: return "cost_increased";
    }
    return "unknown";
}

Eigen::VectorXd damped_step(const ResidualSystem& sys, double lambda) {
    const Eigen::Index cols = sys.J.cols();
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(cols);
    if (cols <= 6) return delta;
    // Dropping the first 6 columns freezes vertex 0.
    const Eigen::SparseMatrix<double> j = sys.J.rightCols(cols - 6);
    Eigen::SparseMatrix<double> h = Eigen::SparseMatrix<double>(j.transpose()) * j;
    const Eigen::VectorXd g = j.transpose() * sys.r;
    if (lambda > 0.0) {
        for (Eigen::Index k = 0; k < h.cols(); ++k) h.coeffRef(k, k) *= (1.0 + lambda);
    }
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(h);
    if (ldlt.info() != Eigen::Success) throw NumericalError("normal equations could not be factorized");
    const Eigen::VectorXd d = ldlt.solve(-g);
    if (ldlt.info() != Eigen::Success || !d.allFinite()) throw NumericalError("normal equations are singular");
    // LDLT on a singular PSD matrix can "succeed" with a zero pivot.
    if ((ldlt.vectorD().array() <= 1e-14 * std::max(1.0, ldlt.vectorD().cwiseAbs().maxCoeff())).any())
        throw NumericalError("normal equations are singular");
    delta.tail(cols - 6) = d;
    return delta;
}

LsResult gauss_newton_solve(const PoseGraph& graph, const std::vector<Pose>& init, const LsParams& params,
                            const LsCallback& callback) {
    return run(Method::GaussNewton, graph, init, params, callback);
}

LsResult levenberg_marquardt_solve(const PoseGraph& graph, const std::vector<Pose>& init, const LsParams& params,
                                   const LsCallback& callback) {
    return run(Method::LevenbergMarquardt, graph, init, params, callback);
}

}  // namespace pgo

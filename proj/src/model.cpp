#include "pgo/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pgo/sym_eigen.hpp"

namespace pgo {

namespace {

Quaternion as_quat(const Vec4& v) { return Quaternion::from_vec(v); }

double weighted_sq(const Vec4& r, const Mat4& s) { return r.dot(s * r); }

const Vec4 kE1(1.0, 0.0, 0.0, 0.0);

}  // namespace

SplitVariables SplitVariables::from_poses(const std::vector<Pose>& poses) {
    SplitVariables v;
    v.p.reserve(poses.size());
    for (const Pose& pose : poses) {
        v.p.push_back(pose.q);
        v.q.push_back(pose.q.vec());
        v.t.push_back(pose.t);
        v.lambda.push_back(Vec4::Zero());
    }
    return v;
}

std::vector<Pose> SplitVariables::poses() const {
    std::vector<Pose> out(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) out[k] = {p[k], t[k]};
    return out;
}

Quaternion translation_residual(const Edge& e, const Vec4& q_i, const UnitQuaternion& p_i, const Vec3& t_i,
                                const Vec3& t_j) {
    const Quaternion s = qmul(qmul(as_quat(q_i), Quaternion::pure(e.t_ij)), qconj(p_i));
    return Quaternion::pure(t_j - t_i) - s;
}

Quaternion rotation_residual(const Edge& e, const Vec4& q_i, const UnitQuaternion& p_j) {
    return qmul(qmul(qconj(p_j), as_quat(q_i)), e.q_ij) - Quaternion::identity();
}

double eval_f(const SplitVariables& vars, const PoseGraph& graph) {
    double total = 0.0;
    for (const Edge& e : graph.edges) {
        const auto i = static_cast<std::size_t>(e.i);
        const auto j = static_cast<std::size_t>(e.j);
        total += weighted_sq(translation_residual(e, vars.q[i], vars.p[i], vars.t[i], vars.t[j]).vec(), e.sigma1);
    }
    return total;
}

double eval_g(const SplitVariables& vars, const PoseGraph& graph) {
    double total = 0.0;
    for (const Edge& e : graph.edges) {
        const auto i = static_cast<std::size_t>(e.i);
        const auto j = static_cast<std::size_t>(e.j);
        total += weighted_sq(rotation_residual(e, vars.q[i], vars.p[j]).vec(), e.sigma2);
    }
    return total;
}

double eval_f_matrix(const SplitVariables& vars, const PoseGraph& graph) {
    const Mat4 d = mat_D();
    double total = 0.0;
    for (const Edge& e : graph.edges) {
        const auto i = static_cast<std::size_t>(e.i);
        const auto j = static_cast<std::size_t>(e.j);
        Vec4 dt = Vec4::Zero();
        dt.tail<3>() = vars.t[j] - vars.t[i];
        const Vec4 r = dt - mat_M(as_quat(vars.q[i])) * mat_M(Quaternion::pure(e.t_ij)) * d * vars.p[i].vec();
        total += weighted_sq(r, e.sigma1);
    }
    return total;
}

double eval_g_matrix(const SplitVariables& vars, const PoseGraph& graph) {
    double total = 0.0;
    for (const Edge& e : graph.edges) {
        const auto i = static_cast<std::size_t>(e.i);
        const auto j = static_cast<std::size_t>(e.j);
        const Vec4 u = mat_W(e.q_ij) * mat_M(vars.p[j]).transpose() * vars.q[i] - kE1;
        total += weighted_sq(u, e.sigma2);
    }
    return total;
}

// d/dp_i of r^T S r with r = dt - q_i t~ p_i*: -2 D (t~* (q_i* (S r))).
Vec4 grad_p_f_at(int v, const SplitVariables& vars, const PoseGraph& graph) {
    const auto vi = static_cast<std::size_t>(v);
    Vec4 grad = Vec4::Zero();
    const Quaternion qc = qconj(as_quat(vars.q[vi]));
    for (int k : graph.out_adj[vi]) {
        const Edge& e = graph.edges[static_cast<std::size_t>(k)];
        const Quaternion r = translation_residual(e, vars.q[vi], vars.p[vi], vars.t[vi],
                                                  vars.t[static_cast<std::size_t>(e.j)]);
        const Quaternion sr = Quaternion::from_vec(e.sigma1 * r.vec());
        const Quaternion a = qmul(qconj(Quaternion::pure(e.t_ij)), qmul(qc, sr));
        grad -= 2.0 * qconj(a).vec();
    }
    return grad;
}

// d/dp_j of u^T S u with u = p_j* q_i q_ij - 1: 2 D (((S u) q_ij*) q_i*).
Vec4 grad_p_g_at(int v, const SplitVariables& vars, const PoseGraph& graph) {
    const auto vj = static_cast<std::size_t>(v);
    Vec4 grad = Vec4::Zero();
    for (int k : graph.in_adj[vj]) {
        const Edge& e = graph.edges[static_cast<std::size_t>(k)];
        const Vec4& qi = vars.q[static_cast<std::size_t>(e.i)];
        const Quaternion u = rotation_residual(e, qi, vars.p[vj]);
        const Quaternion su = Quaternion::from_vec(e.sigma2 * u.vec());
        const Quaternion b = qmul(qmul(su, qconj(e.q_ij)), qconj(as_quat(qi)));
        grad += 2.0 * qconj(b).vec();
    }
    return grad;
}

std::vector<Vec4> grad_p_f(const SplitVariables& vars, const PoseGraph& graph) {
    std::vector<Vec4> out(static_cast<std::size_t>(graph.n));
    for (int v = 0; v < graph.n; ++v) out[static_cast<std::size_t>(v)] = grad_p_f_at(v, vars, graph);
    return out;
}

std::vector<Vec4> grad_p_g(const SplitVariables& vars, const PoseGraph& graph) {
    std::vector<Vec4> out(static_cast<std::size_t>(graph.n));
    for (int v = 0; v < graph.n; ++v) out[static_cast<std::size_t>(v)] = grad_p_g_at(v, vars, graph);
    return out;
}

// r = dt - G1 q_i with G1 = W(p_i)^T W(t~): gradient -2 G1^T S r.
std::vector<Vec4> grad_q_f(const SplitVariables& vars, const PoseGraph& graph) {
    std::vector<Vec4> out(static_cast<std::size_t>(graph.n), Vec4::Zero());
    for (const Edge& e : graph.edges) {
        const auto i = static_cast<std::size_t>(e.i);
        const Quaternion r = translation_residual(e, vars.q[i], vars.p[i], vars.t[i],
                                                  vars.t[static_cast<std::size_t>(e.j)]);
        const Mat4 g1 = mat_W(vars.p[i]).transpose() * mat_W(Quaternion::pure(e.t_ij));
        out[i] -= 2.0 * g1.transpose() * (e.sigma1 * r.vec());
    }
    return out;
}

// u = G2 q_i - 1 with G2 = W(q_ij) M(p_j)^T: gradient 2 G2^T S u.
std::vector<Vec4> grad_q_g(const SplitVariables& vars, const PoseGraph& graph) {
    std::vector<Vec4> out(static_cast<std::size_t>(graph.n), Vec4::Zero());
    for (const Edge& e : graph.edges) {
        const auto i = static_cast<std::size_t>(e.i);
        const auto& pj = vars.p[static_cast<std::size_t>(e.j)];
        const Quaternion u = rotation_residual(e, vars.q[i], pj);
        const Mat4 g2 = mat_W(e.q_ij) * mat_M(pj).transpose();
        out[i] += 2.0 * g2.transpose() * (e.sigma2 * u.vec());
    }
    return out;
}

std::vector<Vec3> grad_t_f(const SplitVariables& vars, const PoseGraph& graph) {
    std::vector<Vec3> out(static_cast<std::size_t>(graph.n), Vec3::Zero());
    for (const Edge& e : graph.edges) {
        const auto i = static_cast<std::size_t>(e.i);
        const auto j = static_cast<std::size_t>(e.j);
        const Quaternion r = translation_residual(e, vars.q[i], vars.p[i], vars.t[i], vars.t[j]);
        const Vec3 v = 2.0 * (e.sigma1 * r.vec()).tail<3>();
        out[j] += v;
        out[i] -= v;
    }
    return out;
}

double augmented_lagrangian(const SplitVariables& vars, const PoseGraph& graph, double beta) {
    double value = eval_f(vars, graph) + eval_g(vars, graph);
    for (std::size_t k = 0; k < vars.p.size(); ++k) {
        const Vec4 gap = vars.p[k].vec() - vars.q[k];
        value += -vars.lambda[k].dot(gap) + 0.5 * beta * gap.squaredNorm();
    }
    return value;
}

double merit_phi(const SplitVariables& vars, const PoseGraph& graph, const std::vector<Vec4>& prev_q,
                 const std::vector<Vec3>& prev_t, double beta, double tau2, double L_f) {
    double dq = 0.0;
    double dt = 0.0;
    for (std::size_t k = 0; k < vars.q.size(); ++k) {
        dq += (vars.q[k] - prev_q[k]).squaredNorm();
        dt += (vars.t[k] - prev_t[k]).squaredNorm();
    }
    return augmented_lagrangian(vars, graph, beta) + (4.0 / beta) * tau2 * tau2 * dq +
           (4.0 / beta) * L_f * L_f * dt;
}

LipschitzEstimates lipschitz_estimates(const PoseGraph& graph, double bound_hint) {
    const auto n = static_cast<std::size_t>(graph.n);
    const double h = bound_hint;
    std::vector<double> fp(n, 0.0), gp(n, 0.0), fq(n, 0.0), gq(n, 0.0), fj(n, 0.0), gj(n, 0.0);
    for (const Edge& e : graph.edges) {
        const auto i = static_cast<std::size_t>(e.i);
        const auto j = static_cast<std::size_t>(e.j);
        const double s1 = max_eigenvalue<4>(e.sigma1);
        const double s2 = max_eigenvalue<4>(e.sigma2);
        const double tn = e.t_ij.norm();
        fp[i] += 2.0 * s1 * tn * tn * h * h;
        gp[j] += 2.0 * s2 * h * h;
        fq[i] += 2.0 * s1 * tn * tn;
        gq[i] += 2.0 * s2;
        const double cf = 4.0 * s1 * std::pow(h * tn + tn + std::sqrt(2.0), 2);
        const double cg = 4.0 * s2 * (h + 1.0) * (h + 1.0);
        fj[i] += cf;
        fj[j] += cf;
        gj[i] += cg;
        gj[j] += cg;
    }
    auto max_of = [](const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); };
    LipschitzEstimates est;
    est.L_f_p = max_of(fp);
    est.L_g_p = max_of(gp);
    est.L_f_q = max_of(fq);
    est.L_g_q = max_of(gq);
    est.L_f = max_of(fj);
    est.L_g = max_of(gj);
    return est;
}

double beta_advisor(const LipschitzEstimates& est, double h1, double h2, double h3) {
    if (est.L_f_p == 0.0 && est.L_g_p == 0.0 && est.L_f_q == 0.0 && est.L_g_q == 0.0 && est.L_f == 0.0 &&
        est.L_g == 0.0)
        return 0.0;
    if (!(h1 > est.L_f_p + est.L_g_p))
        throw std::invalid_argument("beta_advisor: tau1 = " + std::to_string(h1) + " must exceed L_f_p + L_g_p = " +
                                    std::to_string(est.L_f_p + est.L_g_p) + "; increase tau1");
    if (!(h2 > 0.0) || !(h3 > 0.0)) throw std::invalid_argument("beta_advisor: tau2 and tau3 must be > 0");
    const double l2 = est.L_f * est.L_f + est.L_g * est.L_g;
    const double b1 = 4.0 / 3.0 * (est.L_f_q + est.L_g_q);
    const double b2 = 8.0 * l2 / (h1 - est.L_f_p - est.L_g_p);
    const double b3 = (8.0 * l2 + 16.0 * h2 * h2) / h2;
    const double b4 = 8.0 * est.L_f * est.L_f / h3;
    return 1.05 * std::max({b1, b2, b3, b4});
}

StationarityReport epsilon_stationarity(const SplitVariables& vars, const PoseGraph& graph) {
    const auto gpf = grad_p_f(vars, graph);
    const auto gpg = grad_p_g(vars, graph);
    const auto gqf = grad_q_f(vars, graph);
    const auto gqg = grad_q_g(vars, graph);
    const auto gtf = grad_t_f(vars, graph);
    double sp = 0.0, sq = 0.0, st = 0.0, sf = 0.0;
    for (std::size_t k = 0; k < vars.p.size(); ++k) {
        sp += sphere_tangent_project(vars.p[k], -gpf[k] - gpg[k] + vars.lambda[k]).squaredNorm();
        sq += (gqf[k] + gqg[k] + vars.lambda[k]).squaredNorm();
        st += gtf[k].squaredNorm();
        sf += (vars.p[k].vec() - vars.q[k]).squaredNorm();
    }
    return {std::sqrt(sp), std::sqrt(sq), std::sqrt(st), std::sqrt(sf)};
}

}  // namespace pgo

#include "pgo/pieadmm.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include <omp.h>

#include "pgo/errors.hpp"

namespace pgo {

namespace {

constexpr int kIterativeThreshold = 100000;

int thread_count(const AdmmParams& params) {
    if (!params.parallel) return 1;
    return params.threads > 0 ? params.threads : omp_get_max_threads();
}

// Unpivoted Cholesky for the 4x4 SPD q-systems.
Vec4 spd_solve4(const Mat4& a, const Vec4& b) {
    double l[4][4] = {};
    for (int j = 0; j < 4; ++j) {
        double d = a(j, j);
        for (int k = 0; k < j; ++k) d -= l[j][k] * l[j][k];
        l[j][j] = std::sqrt(d);
        for (int i = j + 1; i < 4; ++i) {
            double v = a(i, j);
            for (int k = 0; k < j; ++k) v -= l[i][k] * l[j][k];
            l[i][j] = v / l[j][j];
        }
    }
    Vec4 y;
    for (int i = 0; i < 4; ++i) {
        double v = b(i);
        for (int k = 0; k < i; ++k) v -= l[i][k] * y(k);
        y(i) = v / l[i][i];
    }
    for (int i = 3; i >= 0; --i) {
        double v = y(i);
        for (int k = i + 1; k < 4; ++k) v -= l[k][i] * y(k);
        y(i) = v / l[i][i];
    }
    return y;
}

double max_q_norm(const SplitVariables& vars) {
    double m = 0.0;
    for (const Vec4& q : vars.q) m = std::max(m, q.norm());
    return m;
}

bool all_finite(const SplitVariables& vars) {
    for (std::size_t k = 0; k < vars.p.size(); ++k) {
        if (!vars.p[k].quat().is_finite() || !vars.q[k].allFinite() || !vars.t[k].allFinite() ||
            !vars.lambda[k].allFinite())
            return false;
    }
    return true;
}

IterationRecord evaluate(const AdmmState& state, const PoseGraph& graph, const AdmmParams& params) {
    const SplitVariables& x = state.vars;
    IterationRecord r;
    r.iter = state.iter;
    r.f = eval_f(x, graph);
    r.g = eval_g(x, graph);
    double penalty = 0.0, dq = 0.0, dt = 0.0;
    for (std::size_t k = 0; k < x.p.size(); ++k) {
        const Vec4 gap = x.p[k].vec() - x.q[k];
        penalty += -x.lambda[k].dot(gap) + 0.5 * params.beta * gap.squaredNorm();
        dq += (x.q[k] - state.prev.q[k]).squaredNorm();
        dt += (x.t[k] - state.prev.t[k]).squaredNorm();
    }
    // same quantities as augmented_lagrangian / merit_phi without re-evaluating f and g
    r.lagrangian = r.f + r.g + penalty;
    r.phi = r.lagrangian + (4.0 / params.beta) * (params.tau2 * params.tau2 * dq + state.L_f * state.L_f * dt);
    return r;
}

}  // namespace

AdmmParams resolve_admm_params(const PoseGraph& graph, const AdmmParams& requested, LipschitzEstimates* est_out) {
    AdmmParams p = requested;
    if (p.tol < 0.0 || p.max_iter < 0) throw std::invalid_argument("tol and max_iter must be nonnegative");
    if (p.beta < 0.0 || p.tau1 < 0.0 || p.tau2 < 0.0 || p.tau3 < 0.0)
        throw std::invalid_argument("beta and tau must be positive");
    const LipschitzEstimates est = lipschitz_estimates(graph, p.bound_hint);
    if (est_out) *est_out = est;

    if (p.mode == AdmmMode::Manual) {
        // Scaled to the curvature of f + g in p at |q| = 1.
        const LipschitzEstimates unit = lipschitz_estimates(graph, 1.0);
        double lp = unit.L_f_p + unit.L_g_p;
        if (!(lp > 0.0)) lp = 1.0;
        if (p.beta == 0.0) p.beta = 0.05 * lp;
        if (p.tau1 == 0.0) p.tau1 = 0.25 * lp;
        if (p.tau2 == 0.0) p.tau2 = 1e-2 * p.beta;
        if (p.tau3 == 0.0) p.tau3 = 1e-2 * p.beta;
        return p;
    }

    const double lp = est.L_f_p + est.L_g_p;
    const double l2 = est.L_f * est.L_f + est.L_g * est.L_g;
    if (p.tau1 == 0.0) p.tau1 = lp > 0.0 ? 2.0 * lp : 1.0;
    const double tau_default = l2 > 0.0 ? std::sqrt(0.5 * l2) : 1.0;
    if (p.tau2 == 0.0) p.tau2 = tau_default;
    if (p.tau3 == 0.0) p.tau3 = tau_default;
    const double bound = beta_advisor(est, p.tau1, p.tau2, p.tau3);
    if (p.beta == 0.0) {
        p.beta = bound > 0.0 ? bound : 1.0;
    } else if (p.beta < bound) {
        throw std::invalid_argument("theory mode: beta = " + std::to_string(p.beta) +
                                    " is below the admissible bound " + std::to_string(bound));
    }
    return p;
}

TranslationSystem::TranslationSystem(const PoseGraph& graph, double tau3) : tau3_(tau3) {
    if (!(tau3 > 0.0)) throw std::invalid_argument("tau3 must be > 0");
    const int dim = 3 * graph.n;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(36 * graph.num_edges() + dim));
    for (int k = 0; k < dim; ++k) trip.emplace_back(k, k, tau3);
    for (const Edge& e : graph.edges) {
        const Mat3 s = 2.0 * e.sigma1_hat();
        const int bi = 3 * e.i;
        const int bj = 3 * e.j;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                trip.emplace_back(bi + r, bi + c, s(r, c));
                trip.emplace_back(bj + r, bj + c, s(r, c));
                trip.emplace_back(bi + r, bj + c, -s(r, c));
                trip.emplace_back(bj + r, bi + c, -s(r, c));
            }
        }
    }
    a_.resize(dim, dim);
    a_.setFromTriplets(trip.begin(), trip.end());
    a_.makeCompressed();

    iterative_ = graph.n > kIterativeThreshold;
    if (iterative_) {
        cg_ = std::make_shared<Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>>();
        cg_->setTolerance(1e-10);
        cg_->compute(a_);
    } else {
        ldlt_ = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
        ldlt_->compute(a_);
        if (ldlt_->info() != Eigen::Success) throw NumericalError("translation system factorization failed");
    }
}

Eigen::VectorXd TranslationSystem::rhs(const SplitVariables& vars, const PoseGraph& graph,
                                       const std::vector<Vec3>& t_prev) const {
    Eigen::VectorXd b(3 * graph.n);
    for (int v = 0; v < graph.n; ++v) b.segment<3>(3 * v) = tau3_ * t_prev[static_cast<std::size_t>(v)];
    for (const Edge& e : graph.edges) {
        const auto i = static_cast<std::size_t>(e.i);
        const Quaternion s = qmul(qmul(Quaternion::from_vec(vars.q[i]), Quaternion::pure(e.t_ij)), qconj(vars.p[i]));
        const Vec3 w = 2.0 * (e.sigma1_hat() * s.imag() + e.sigma12() * s.w);
        b.segment<3>(3 * e.j) += w;
        b.segment<3>(3 * e.i) -= w;
    }
    return b;
}

Eigen::VectorXd TranslationSystem::solve(const Eigen::VectorXd& rhs, const Eigen::VectorXd& guess) const {
    if (iterative_) {
        Eigen::VectorXd x = cg_->solveWithGuess(rhs, guess);
        if (cg_->info() != Eigen::Success) throw NumericalError("translation CG did not converge");
        return x;
    }
    return ldlt_->solve(rhs);
}

TranslationSystem assemble_t_system(const PoseGraph& graph, const AdmmParams& params) {
    return TranslationSystem(graph, params.tau3);
}

void step_p(AdmmState& state, const PoseGraph& graph, const AdmmParams& params) {
    SplitVariables& x = state.vars;
    std::vector<UnitQuaternion> next(x.p.size());
    const double denom = params.beta + params.tau1;
    int degenerate = 0;
    const int nt = thread_count(params);
#pragma omp parallel for schedule(static) reduction(+ : degenerate) num_threads(nt)
    for (int v = 0; v < graph.n; ++v) {
        const auto k = static_cast<std::size_t>(v);
        const Vec4 c = (params.beta * x.q[k] + x.lambda[k] + params.tau1 * x.p[k].vec() -
                        grad_p_f_at(v, x, graph) - grad_p_g_at(v, x, graph)) /
                       denom;
        const double nrm = c.norm();
        if (!(nrm >= 1e-15) || !std::isfinite(nrm)) {
            next[k] = x.p[k];
            ++degenerate;
        } else {
            next[k] = UnitQuaternion::from_vec(c);
        }
    }
    x.p = std::move(next);
    state.degenerate_projections += degenerate;
}

void step_q(AdmmState& state, const PoseGraph& graph, const AdmmParams& params) {
    SplitVariables& x = state.vars;
    if (state.q_terms.size() != graph.edges.size()) {
        state.q_terms.resize(graph.edges.size());
        for (std::size_t ei = 0; ei < graph.edges.size(); ++ei) {
            const Edge& e = graph.edges[ei];
            QEdgeTerms& c = state.q_terms[ei];
            c.wt = mat_W(Quaternion::pure(e.t_ij));
            c.w0 = mat_W(e.q_ij).row(0).transpose();
            c.iso1 = e.sigma1_isotropic();
            c.iso2 = e.sigma2_isotropic();
        }
    }
    const std::vector<QEdgeTerms>& terms = state.q_terms;
    std::vector<Vec4> next(x.q.size());
    const int nt = thread_count(params);
#pragma omp parallel for schedule(static) num_threads(nt)
    for (int v = 0; v < graph.n; ++v) {
        const auto k = static_cast<std::size_t>(v);
        Mat4 a = (params.beta + params.tau2) * Mat4::Identity();
        Vec4 b = params.beta * x.p[k].vec() - x.lambda[k] + params.tau2 * x.q[k];
        const Mat4 wp = mat_W(x.p[k]);
        const double pk2 = x.p[k].vec().squaredNorm();
        for (int ei : graph.out_adj[k]) {
            const Edge& e = graph.edges[static_cast<std::size_t>(ei)];
            const QEdgeTerms& c = terms[static_cast<std::size_t>(ei)];
            const Quaternion& pj = x.p[static_cast<std::size_t>(e.j)];
            Vec4 d = Vec4::Zero();
            d.tail<3>() = x.t[static_cast<std::size_t>(e.j)] - x.t[k];
            // g1 = W(p_i)^T W(t_ij), g2 = W(q_ij) M(p_j)^T
            if (c.iso1) {
                // W^T W = |.|^2 I, so diag(a, s, s, s) leaves a rank-one term.
                const double s = e.sigma1(1, 1);
                const Vec4 u = c.wt.transpose() * wp.col(0);
                a.diagonal().array() += 2.0 * s * pk2 * e.t_ij.squaredNorm();
                a.noalias() += 2.0 * (e.sigma1(0, 0) - s) * u * u.transpose();
            } else {
                const Mat4 g1 = wp.transpose() * c.wt;
                a.noalias() += 2.0 * g1.transpose() * e.sigma1 * g1;
            }
            b.noalias() += 2.0 * c.wt.transpose() * (wp * (e.sigma1 * d));
            const Mat4 mp = mat_M(pj);
            if (c.iso2) {
                const double s = e.sigma2(0, 0);
                a.diagonal().array() += 2.0 * s * pj.vec().squaredNorm();
                b.noalias() += 2.0 * s * (mp * c.w0);
            } else {
                const Mat4 g2 = mat_W(e.q_ij) * mp.transpose();
                a.noalias() += 2.0 * g2.transpose() * e.sigma2 * g2;
                b.noalias() += 2.0 * g2.transpose() * e.sigma2.col(0);
            }
        }
        next[k] = spd_solve4(a, b);
    }
    x.q = std::move(next);
}

void step_t(AdmmState& state, const TranslationSystem& system, const PoseGraph& graph) {
    SplitVariables& x = state.vars;
    const Eigen::VectorXd b = system.rhs(x, graph, x.t);
    Eigen::VectorXd guess(3 * graph.n);
    for (int v = 0; v < graph.n; ++v) guess.segment<3>(3 * v) = x.t[static_cast<std::size_t>(v)];
    const Eigen::VectorXd sol = system.solve(b, guess);
    for (int v = 0; v < graph.n; ++v) x.t[static_cast<std::size_t>(v)] = sol.segment<3>(3 * v);
}

void step_lambda(AdmmState& state, const AdmmParams& params) {
    SplitVariables& x = state.vars;
    for (std::size_t k = 0; k < x.lambda.size(); ++k) x.lambda[k] -= params.beta * (x.p[k].vec() - x.q[k]);
}

double residual(const AdmmState& state, const AdmmParams& params) {
    const SplitVariables& x = state.vars;
    const SplitVariables& y = state.prev;
    double dl = 0.0, dq = 0.0, dt = 0.0;
    for (std::size_t k = 0; k < x.p.size(); ++k) {
        dl += (x.lambda[k] - y.lambda[k]).squaredNorm();
        dq += (x.q[k] - y.q[k]).squaredNorm();
        dt += (x.t[k] - y.t[k]).squaredNorm();
    }
    return dl / params.beta + params.beta * (dq + dt);
}

AdmmState make_admm_state(const std::vector<Pose>& init) {
    AdmmState s;
    s.vars = SplitVariables::from_poses(init);
    s.prev = s.vars;
    return s;
}

AdmmResult pieadmm_solve(const PoseGraph& graph, const std::vector<Pose>& init, const AdmmParams& params,
                         const AdmmCallback& callback) {
    if (static_cast<int>(init.size()) != graph.n)
        throw std::invalid_argument("initial pose count " + std::to_string(init.size()) + " != vertex count " +
                                    std::to_string(graph.n));
    AdmmResult result;
    result.params = resolve_admm_params(graph, params, &result.estimates);
    AdmmParams& p = result.params;

    AdmmState& state = result.state;
    state = make_admm_state(init);
    state.L_f = result.estimates.L_f;

    auto clock_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
    };

    TranslationSystem system = assemble_t_system(graph, p);
    state.initial = evaluate(state, graph, p);
    state.initial.time_s = elapsed();
    if (callback) callback(state.initial, state);

    double hint = p.bound_hint;
    for (int k = 1; k <= p.max_iter; ++k) {
        state.prev = state.vars;
        state.iter = k;
        step_p(state, graph, p);
        step_q(state, graph, p);
        step_t(state, system, graph);
        step_lambda(state, p);
        if (!all_finite(state.vars))
            throw SolverDiverged("non-finite iterate at iteration " + std::to_string(k) + " (beta = " +
                                 std::to_string(p.beta) + ")");

        IterationRecord rec = evaluate(state, graph, p);
        rec.residual = residual(state, p);
        rec.time_s = elapsed();
        state.history.push_back(rec);
        if (callback) callback(rec, state);
        if (rec.residual < p.tol) {
            result.converged = true;
            break;
        }

        // Keep the theory-mode bound valid if q drifted past the assumed norm bound.
        if (p.mode == AdmmMode::Theory) {
            const double qmax = max_q_norm(state.vars);
            if (qmax > hint) {
                hint = 1.25 * qmax;
                const LipschitzEstimates est = lipschitz_estimates(graph, hint);
                if (p.tau1 <= est.L_f_p + est.L_g_p) p.tau1 = 2.0 * (est.L_f_p + est.L_g_p);
                const double bound = beta_advisor(est, p.tau1, p.tau2, p.tau3);
                if (bound > p.beta) {
                    p.beta = bound;
                    ++state.beta_updates;
                }
                state.L_f = std::max(state.L_f, est.L_f);
                result.estimates = est;
            }
        }
    }

    result.poses = state.vars.poses();
    return result;
}

}  // namespace pgo

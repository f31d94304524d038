#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Sparse>

#include "pgo/model.hpp"

namespace pgo {

enum class AdmmMode { Theory, Manual };

/*
 * Penalty beta and proximal weights H1 = tau1 I, H2 = tau2 I, H3 = tau3 I.
 * Zero means "choose automatically" (see resolve_admm_params).
 */
struct AdmmParams {
    double beta = 0.0;
    double tau1 = 0.0;
    double tau2 = 0.0;
    double tau3 = 0.0;
    double tol = 1e-4;
    int max_iter = 300;
    AdmmMode mode = AdmmMode::Manual;
    bool parallel = true;
    int threads = 0;           // 0: OpenMP default
    double bound_hint = 1.5;   // assumed bound on |q_i| for the Lipschitz estimates
};

struct IterationRecord {
    int iter = 0;
    double time_s = 0.0;
    double f = 0.0;
    double g = 0.0;
    double lagrangian = 0.0;
    double phi = 0.0;
    double residual = 0.0;
};

// Per-edge constants of the q-subproblem, filled on first use.
struct QEdgeTerms {
    Mat4 wt;             // W(t_ij)
    Vec4 w0;             // first row of W(q_ij)
    bool iso1 = false;   // sigma1 = diag(a, s, s, s)
    bool iso2 = false;   // sigma2 = s I
};

struct AdmmState {
    SplitVariables vars;
    SplitVariables prev;  // iterate k-1, for the residual and the merit history terms
    int iter = 0;
    IterationRecord initial;               // values at the starting point
    std::vector<IterationRecord> history;  // one per completed iteration
    int degenerate_projections = 0;
    double L_f = 0.0;                      // used by the merit function
    int beta_updates = 0;                  // times the |q| monitor raised beta
    std::vector<QEdgeTerms> q_terms;
};

/*
 * Theory mode: tau1 = 2 (L_f_p + L_g_p), tau2 = tau3 = sqrt((L_f^2 + L_g^2) / 2)
 * (the minimizer of the third bound term), beta = beta_advisor(...). A
 * user-supplied beta below the bound throws std::invalid_argument.
 *
 * Manual mode: with L_p = L_f_p + L_g_p evaluated at |q| = 1, beta = L_p / 20,
 * tau1 = L_p / 4, tau2 = tau3 = beta / 100. User-supplied values are kept
 * as given.
 */
AdmmParams resolve_admm_params(const PoseGraph& graph, const AdmmParams& requested, LipschitzEstimates* est = nullptr);

// Sparse factorization of A = 2 Q^T (I (x) sigma1_hat) Q + tau3 I, built once.
class TranslationSystem {
public:
    TranslationSystem(const PoseGraph& graph, double tau3);

    const Eigen::SparseMatrix<double>& matrix() const { return a_; }
    double tau3() const { return tau3_; }
    bool iterative() const { return iterative_; }

    // Right-hand side 2 Q^T (sigma1_hat s_v + sigma12 s_0) + tau3 t_prev with
    // s = q_i [0, t_ij] p_i*.
    Eigen::VectorXd rhs(const SplitVariables& vars, const PoseGraph& graph, const std::vector<Vec3>& t_prev) const;
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs, const Eigen::VectorXd& guess) const;

private:
    Eigen::SparseMatrix<double> a_;
    double tau3_;
    bool iterative_ = false;
    std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
    std::shared_ptr<Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>> cg_;
};

TranslationSystem assemble_t_system(const PoseGraph& graph, const AdmmParams& params);

// The four steps of one iteration. Each reads the iterate it needs from
// state.vars (and state.prev where the previous iterate is required).
void step_p(AdmmState& state, const PoseGraph& graph, const AdmmParams& params);
void step_q(AdmmState& state, const PoseGraph& graph, const AdmmParams& params);
void step_t(AdmmState& state, const TranslationSystem& system, const PoseGraph& graph);
void step_lambda(AdmmState& state, const AdmmParams& params);

// (1/beta) |lambda - lambda_prev|^2 + beta (|q - q_prev|^2 + |t - t_prev|^2)
double residual(const AdmmState& state, const AdmmParams& params);

AdmmState make_admm_state(const std::vector<Pose>& init);

using AdmmCallback = std::function<void(const IterationRecord&, const AdmmState&)>;

struct AdmmResult {
    std::vector<Pose> poses;  // (p, t) of the final iterate
    AdmmState state;
    AdmmParams params;        // as resolved
    LipschitzEstimates estimates;
    bool converged = false;
};

/*
 * Runs p -> q -> t -> lambda until the residual drops below tol or max_iter
 * is reached. The callback fires once for the initial point (iter 0) and
 * once per iteration. Throws SolverDiverged on a non-finite iterate.
 */
AdmmResult pieadmm_solve(const PoseGraph& graph, const std::vector<Pose>& init, const AdmmParams& params,
                         const AdmmCallback& callback = {});

}  // namespace pgo

// Prints one PASS/FAIL line per acceptance criterion; exits nonzero on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "pgo/g2o.hpp"
#include "pgo/initializer.hpp"
#include "pgo/manifold_ls.hpp"
#include "pgo/metrics.hpp"
#include "pgo/pieadmm.hpp"
#include "pgo/quat.hpp"
#include "pgo/synth.hpp"
#include "pgo/vmf.hpp"

using namespace pgo;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %2d %s: %s (%.2fs)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// ---- 1 ----------------------------------------------------------------------

Outcome quaternion_algebra() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const Quaternion a{nd(rng), nd(rng), nd(rng), nd(rng)};
        const Quaternion b{nd(rng), nd(rng), nd(rng), nd(rng)};
        const Vec3 t(nd(rng), nd(rng), nd(rng));
        const Vec4 ab = oracle::hamilton(a.vec(), b.vec());
        const double n2 = a.vec().squaredNorm();
        worst = std::max({worst, (mat_M(qconj(a)) - mat_M(a).transpose()).norm(),
                          (mat_W(qconj(a)) - mat_W(a).transpose()).norm(), (qmul(a, b).vec() - ab).norm(),
                          (mat_M(a) * b.vec() - ab).norm(), (mat_W(b) * a.vec() - ab).norm(),
                          (mat_M(a).transpose() * mat_M(a) - n2 * Mat4::Identity()).norm() / (1 + n2),
                          (mat_W(a).transpose() * mat_W(a) - n2 * Mat4::Identity()).norm() / (1 + n2)});
        const Quaternion v = qmul(qmul(a, Quaternion::pure(t)), qconj(a));
        worst = std::max(worst, std::abs(v.w) / (1 + n2 * t.norm()));
        worst = std::max(worst, (Quaternion::pure(t).vec() + qconj(Quaternion::pure(t)).vec()).norm());
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-12 && secs < 1.0, fmt("max identity error %.2e", worst) + fmt(", %.3fs", secs)};
}

// ---- 2 ----------------------------------------------------------------------

Outcome gradients() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + trial % 5;
        const int m = 1 + trial % 12;
        const PoseGraph g = testutil::random_graph(rng, n, m);
        const SplitVariables v = testutil::random_vars(rng, n);
        const auto raw = testutil::raw_edges(g);
        const auto P = testutil::p_vectors(v);

        auto stack4 = [](const std::vector<Vec4>& xs) {
            oracle::VectorXd out(4 * xs.size());
            for (std::size_t k = 0; k < xs.size(); ++k) out.segment<4>(4 * k) = xs[k];
            return out;
        };
        auto stack3 = [](const std::vector<Vec3>& xs) {
            oracle::VectorXd out(3 * xs.size());
            for (std::size_t k = 0; k < xs.size(); ++k) out.segment<3>(3 * k) = xs[k];
            return out;
        };
        auto unstack4 = [n](const oracle::VectorXd& x) {
            std::vector<Vec4> out(n);
            for (int k = 0; k < n; ++k) out[k] = x.segment<4>(4 * k);
            return out;
        };
        auto unstack3 = [n](const oracle::VectorXd& x) {
            std::vector<Vec3> out(n);
            for (int k = 0; k < n; ++k) out[k] = x.segment<3>(3 * k);
            return out;
        };
        // p is treated as a free point of R^4 for differentiation
        const oracle::VectorXd xp = stack4(P), xq = stack4(v.q), xt = stack3(v.t);
        const oracle::VectorXd fd[5] = {
            oracle::central_gradient([&](const oracle::VectorXd& x) { return oracle::raw_f(raw, unstack4(x), v.q, v.t); }, xp),
            oracle::central_gradient([&](const oracle::VectorXd& x) { return oracle::raw_g(raw, unstack4(x), v.q); }, xp),
            oracle::central_gradient([&](const oracle::VectorXd& x) { return oracle::raw_f(raw, P, unstack4(x), v.t); }, xq),
            oracle::central_gradient([&](const oracle::VectorXd& x) { return oracle::raw_g(raw, P, unstack4(x)); }, xq),
            oracle::central_gradient([&](const oracle::VectorXd& x) { return oracle::raw_f(raw, P, v.q, unstack3(x)); }, xt)};
        const oracle::VectorXd an[5] = {stack4(grad_p_f(v, g)), stack4(grad_p_g(v, g)), stack4(grad_q_f(v, g)),
                                        stack4(grad_q_g(v, g)), stack3(grad_t_f(v, g))};
        for (int k = 0; k < 5; ++k) worst = std::max(worst, oracle::rel_diff(an[k], fd[k]));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-5 && secs < 30.0, fmt("max relative error %.2e over 5 gradients x 50 graphs", worst)};
}

// ---- 3 ----------------------------------------------------------------------

AdmmParams manual(double beta, double tau1, double tau2, double tau3) {
    AdmmParams p;
    p.beta = beta;
    p.tau1 = tau1;
    p.tau2 = tau2;
    p.tau3 = tau3;
    return p;
}

Outcome subproblems() {
    std::mt19937_64 rng(3);
    double q_worst = 0.0, t_worst = 0.0, p_gap = -1e300;
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 3;
        const PoseGraph g = testutil::random_graph(rng, n, 2 + trial % 5, trial % 2 == 0);
        const AdmmParams prm = manual(2.0 + trial, 1.0, 0.5, 0.4);
        AdmmState s;
        s.vars = testutil::random_vars(rng, n);
        s.prev = s.vars;
        const AdmmState before = s;

        step_p(s, g, prm);
        for (int k = 0; k < n; ++k) {
            const Vec4 grad = grad_p_f_at(k, before.vars, g) + grad_p_g_at(k, before.vars, g);
            const Vec4& q = before.vars.q[k];
            const Vec4 pk = before.vars.p[k].vec();
            auto obj = [&](const Vec4& x) {
                return grad.dot(x) - before.vars.lambda[k].dot(x - q) + 0.5 * prm.beta * (x - q).squaredNorm() +
                       0.5 * prm.tau1 * (x - pk).squaredNorm();
            };
            const Vec4 best = oracle::sphere_search(obj, 1000 + 10 * trial + k);
            p_gap = std::max(p_gap, obj(s.vars.p[k].vec()) - obj(best));
        }

        const std::vector<Vec4> q_prev = s.vars.q;
        step_q(s, g, prm);
        const auto gqf = grad_q_f(s.vars, g), gqg = grad_q_g(s.vars, g);
        double r2 = 0.0;
        for (int k = 0; k < n; ++k)
            r2 += (gqf[k] + gqg[k] + s.vars.lambda[k] - prm.beta * (s.vars.p[k].vec() - s.vars.q[k]) +
                   prm.tau2 * (s.vars.q[k] - q_prev[k]))
                      .squaredNorm();
        q_worst = std::max(q_worst, std::sqrt(r2));

        const std::vector<Vec3> t_prev = s.vars.t;
        step_t(s, assemble_t_system(g, prm), g);
        const auto gtf = grad_t_f(s.vars, g);
        r2 = 0.0;
        for (int k = 0; k < n; ++k) r2 += (gtf[k] + prm.tau3 * (s.vars.t[k] - t_prev[k])).squaredNorm();
        t_worst = std::max(t_worst, std::sqrt(r2));
    }
    const bool ok = q_worst <= 1e-8 && t_worst <= 1e-8 && p_gap <= 1e-6;
    char buf[160];
    std::snprintf(buf, sizeof buf, "q grad %.2e, t grad %.2e, p gap vs sphere search %.2e", q_worst, t_worst, p_gap);
    return {ok, buf};
}

// ---- 4 ----------------------------------------------------------------------

Outcome merit_monotone() {
    double worst = -1e300;
    int iters = 0;
    for (int seed = 0; seed < 20; ++seed) {
        CubeSpec spec;
        spec.n_hat = 3;
        spec.p_cube = 0.3;
        spec.sigma_r = 0.1;
        spec.sigma_t_rel = 0.1;
        spec.seed = static_cast<std::uint64_t>(seed);
        const Dataset ds = gen_cube(spec);
        AdmmParams p;
        p.mode = AdmmMode::Theory;
        const AdmmResult r = pieadmm_solve(ds.graph, chordal_init(ds.graph), p);
        double prev = r.state.initial.phi;
        for (const IterationRecord& h : r.state.history) {
            worst = std::max(worst, h.phi - prev);
            prev = h.phi;
            ++iters;
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "max phi increase %.3e over %d iterations", worst, iters);
    return {worst <= 1e-9, buf};
}

// ---- 5 ----------------------------------------------------------------------

Outcome exact_recovery() {
    const auto t0 = Clock::now();
    RingSpec rs;
    rs.n = 12;
    CubeSpec cs;
    cs.n_hat = 3;
    cs.p_cube = 0.3;
    double worst = 0.0;
    for (const Dataset& ds : {gen_ring(rs), gen_cube(cs)}) {
        const std::vector<Pose> init = chordal_init(ds.graph);
        worst = std::max(worst, aligned_rel_err(pieadmm_solve(ds.graph, init, AdmmParams{}).poses, ds.truth));
        worst = std::max(worst, aligned_rel_err(gauss_newton_solve(ds.graph, init, LsParams{}).poses, ds.truth));
        worst = std::max(worst, aligned_rel_err(levenberg_marquardt_solve(ds.graph, init, LsParams{}).poses, ds.truth));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-6 && secs < 10.0, fmt("max Rel.Err %.2e", worst) + fmt(", %.2fs", secs)};
}

// ---- 6 ----------------------------------------------------------------------

Outcome table2() {
    const auto t0 = Clock::now();
    const double cells[3][3] = {{0.01, 0.05, 0.164}, {0.03, 0.1, 0.398}, {0.05, 0.2, 0.714}};
    bool ok = true;
    std::string detail;
    for (const auto& c : cells) {
        double admm = 0.0, gn = 0.0;
        for (int seed = 0; seed < 5; ++seed) {
            RingSpec spec;
            spec.n = 100;
            spec.sigma_r = c[0];
            spec.sigma_t = c[1];
            spec.seed = static_cast<std::uint64_t>(seed);
            const Dataset ds = gen_ring(spec);
            const std::vector<Pose> init = chordal_init(ds.graph);
            admm += aligned_rel_err(pieadmm_solve(ds.graph, init, AdmmParams{}).poses, ds.truth) / 5.0;
            gn += aligned_rel_err(gauss_newton_solve(ds.graph, init, LsParams{}).poses, ds.truth) / 5.0;
        }
        const bool band = std::abs(admm - c[2]) <= 0.25 * c[2];
        const bool vs = admm <= 1.05 * gn;
        ok = ok && band && vs;
        char buf[128];
        std::snprintf(buf, sizeof buf, "%s(%.2f,%.2f) admm %.4f target %.3f mgn %.4f", detail.empty() ? "" : "; ", c[0],
                      c[1], admm, c[2], gn);
        detail += buf;
    }
    const double secs = seconds_since(t0);
    return {ok && secs < 120.0, detail};
}

// ---- 7 ----------------------------------------------------------------------

Outcome init_ordering() {
    int wins = 0;
    for (int seed = 0; seed < 5; ++seed) {
        RingSpec spec;
        spec.n = 100;
        spec.sigma_r = 0.03;
        spec.sigma_t = 0.1;
        spec.seed = static_cast<std::uint64_t>(seed);
        const Dataset ds = gen_ring(spec);
        if (aligned_rel_err(chordal_init(ds.graph), ds.truth) < aligned_rel_err(odometry_init(ds.graph), ds.truth))
            ++wins;
    }
    return {wins >= 4, std::to_string(wins) + "/5 seeds chordal better"};
}

// ---- 8 ----------------------------------------------------------------------

Outcome edge_law() {
    bool ok = true;
    std::string detail;
    for (auto [n, p] : {std::pair{3, 0.3}, std::pair{4, 0.7}}) {
        double total = 0.0;
        for (int seed = 0; seed < 1000; ++seed) {
            CubeSpec spec;
            spec.n_hat = n;
            spec.p_cube = p;
            spec.seed = static_cast<std::uint64_t>(seed);
            total += gen_cube(spec).graph.num_edges();
        }
        const double mean = total / 1000.0, expect = expected_cube_edges(n, p);
        ok = ok && std::abs(mean - expect) <= 0.02 * expect;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s(%d,%.1f) mean %.2f E %.2f", detail.empty() ? "" : "; ", n, p, mean, expect);
        detail += buf;
    }
    return {ok, detail};
}

// ---- 9 ----------------------------------------------------------------------

Outcome vmf_fidelity() {
    bool ok = true;
    std::string detail;
    for (double kappa : {10.0, 100.0, 1000.0}) {
        const VmfParams p{Vec4(1, 0, 0, 0), kappa};
        double s = 0.0;
        const auto xs = vmf_sample(p, 9, 10000);
        for (const Vec4& x : xs) s += p.mu.dot(x);
        const double mean = s / xs.size(), ref = oracle::vmf_mean_cosine(kappa);
        ok = ok && std::abs(mean - ref) <= 0.005;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%sk=%g %.5f vs %.5f", detail.empty() ? "" : "; ", kappa, mean, ref);
        detail += buf;
    }
    return {ok, detail};
}

// ---- 10 ---------------------------------------------------------------------

// Best of two timed runs of each solver from the same chordal start.
std::pair<double, double> time_solvers(const PoseGraph& graph) {
    const std::vector<Pose> init = chordal_init(graph);
    double ta = 1e300, tg = 1e300;
    for (int rep = 0; rep < 2; ++rep) {
        auto t0 = Clock::now();
        pieadmm_solve(graph, init, AdmmParams{});
        ta = std::min(ta, seconds_since(t0));
        t0 = Clock::now();
        gauss_newton_solve(graph, init, LsParams{});
        tg = std::min(tg, seconds_since(t0));
    }
    return {ta, tg};
}

Outcome scaling() {
    bool ok = true;
    std::string detail;
    auto add = [&](const std::string& name, std::pair<double, double> t) {
        ok = ok && t.first <= t.second;
        char buf[128];
        std::snprintf(buf, sizeof buf, "%s%s admm %.3fs mgn %.3fs", detail.empty() ? "" : "; ", name.c_str(), t.first,
                      t.second);
        detail += buf;
    };
    for (int n : {8, 10}) {
        CubeSpec spec;
        spec.n_hat = n;
        spec.p_cube = 0.3;
        spec.sigma_r = 0.1;
        spec.sigma_t_rel = 0.1;
        spec.seed = 1;
        add("cube" + std::to_string(n), time_solvers(gen_cube(spec).graph));
    }
    // Benchmark graphs are not bundled; PGO_BENCH_DIR may point at local copies.
    const char* dir = std::getenv("PGO_BENCH_DIR");
    int loaded = 0;
    for (const char* name : {"garage.g2o", "torus3D.g2o", "sphere2500.g2o", "cubicle.g2o"}) {
        if (dir == nullptr) break;
        const std::filesystem::path path = std::filesystem::path(dir) / name;
        if (!std::filesystem::exists(path)) continue;
        add(name, time_solvers(load_g2o(path.string()).graph));
        ++loaded;
    }
    if (loaded == 0) detail += "; benchmark graphs skipped (not available locally)";
    return {ok, detail};
}

// ---- 11 ---------------------------------------------------------------------

Outcome g2o_roundtrip() {
    const std::string path = std::string(PGO_FIXTURE_DIR) + "/graph50.g2o";
    const G2oData a = load_g2o(path);
    const std::string tmp = (std::filesystem::temp_directory_path() / "pgo_acceptance_roundtrip.g2o").string();
    save_g2o(tmp, a.graph, a.poses, a.original_ids);
    const G2oData b = load_g2o(tmp);
    std::filesystem::remove(tmp);
    if (a.graph.n != 50 || b.graph.n != a.graph.n || b.graph.num_edges() != a.graph.num_edges())
        return {false, "size mismatch"};
    double worst = 0.0;
    for (int v = 0; v < a.graph.n; ++v)
        worst = std::max({worst, (a.poses[v].t - b.poses[v].t).norm(), (a.poses[v].q.vec() - b.poses[v].q.vec()).norm()});
    for (int k = 0; k < a.graph.num_edges(); ++k) {
        const Edge &x = a.graph.edges[k], &y = b.graph.edges[k];
        if (x.i != y.i || x.j != y.j) return {false, "edge endpoints differ"};
        worst = std::max({worst, (x.t_ij - y.t_ij).norm(), (x.q_ij.vec() - y.q_ij.vec()).norm(),
                          (x.sigma1 - y.sigma1).norm() / x.sigma1.norm(), (x.sigma2 - y.sigma2).norm() / x.sigma2.norm()});
    }
    return {worst <= 1e-9, fmt("max difference %.2e", worst)};
}

}  // namespace

int main() {
    report(1, "quaternion algebra", quaternion_algebra);
    report(2, "gradient correctness", gradients);
    report(3, "subproblem optimality", subproblems);
    report(4, "merit monotonicity (theory mode)", merit_monotone);
    report(5, "noiseless exact recovery", exact_recovery);
    report(6, "ring table reproduction", table2);
    report(7, "initialization ordering", init_ordering);
    report(8, "cube edge-count law", edge_law);
    report(9, "vMF sampler fidelity", vmf_fidelity);
    report(10, "scaling trend", scaling);
    report(11, "g2o round trip", g2o_roundtrip);
    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}

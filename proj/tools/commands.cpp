#include "commands.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "pgo/errors.hpp"
#include "pgo/g2o.hpp"
#include "pgo/initializer.hpp"
#include "pgo/metrics.hpp"
#include "pgo/synth.hpp"

namespace pgo::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Removes the registered files unless release() is called.
class OutputGuard {
public:
    void add(const std::string& path) { paths_.push_back(path); }
    void release() { paths_.clear(); }
    ~OutputGuard() {
        std::error_code ec;
        for (const auto& p : paths_) fs::remove(p, ec);
    }

private:
    std::vector<std::string> paths_;
};

KappaConvention parse_convention(const std::string& s) {
    if (s == "inverse-variance") return KappaConvention::InverseVariance;
    if (s == "literal") return KappaConvention::Literal;
    throw std::invalid_argument("unknown kappa convention: " + s);
}

std::vector<Pose> load_poses(const std::string& path) { return load_g2o(path).poses; }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path);
    f << text;
    if (!f) throw Error("failed writing " + path);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double safe_nrmse(const std::vector<Pose>& est, const std::vector<Pose>& truth) {
    try {
        return nrmse(align_to_truth(est, truth, AlignMode::Anchor0), truth);
    } catch (const DegenerateInput&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

json quantiles(const std::vector<double>& v) {
    return {{"p50", quantile(v, 0.5)}, {"p90", quantile(v, 0.9)}, {"p99", quantile(v, 0.99)}, {"max", quantile(v, 1.0)}};
}

json params_json(const SolveOptions& o, const SolveReport& r) {
    if (o.algo == Algo::PieAdmm) {
        return {{"beta", r.admm.beta},     {"tau1", r.admm.tau1},
                {"tau2", r.admm.tau2},     {"tau3", r.admm.tau3},
                {"mode", r.admm.mode == AdmmMode::Theory ? "theory" : "manual"},
                {"tol", r.admm.tol},       {"max_iter", r.admm.max_iter},
                {"threads", r.admm.threads}};
    }
    json j = {{"tol", o.ls.tol}, {"max_iter", o.ls.max_iter}, {"threads", o.ls.threads}};
    if (o.algo == Algo::LevenbergMarquardt) {
        j["lambda0"] = o.ls.lm_lambda0;
        j["lambda_up"] = o.ls.lm_up;
        j["lambda_down"] = o.ls.lm_down;
    }
    return j;
}

std::string convergence_csv(const SolveReport& r) {
    std::ostringstream s;
    s << std::setprecision(17);
    s << "iter,time_s,f,g,lagrangian,phi,residual,rel_err\n";
    for (std::size_t k = 0; k < r.history.size(); ++k) {
        const IterationRecord& h = r.history[k];
        s << h.iter << ',' << h.time_s << ',' << h.f << ',' << h.g << ',' << h.lagrangian << ',' << h.phi << ','
          << h.residual << ',';
        if (k < r.rel_err.size()) s << r.rel_err[k];
        s << '\n';
    }
    return s.str();
}

// ---- generate ---------------------------------------------------------------

struct GenerateArgs {
    int n = 100;
    int nhat = 3;
    double p = 0.3;
    double sigma_r = 0.0;
    double sigma_t = 0.0;
    double sigma_t_rel = 0.0;
    std::uint64_t seed = 0;
    std::string convention = "inverse-variance";
    std::string out;
};

int do_generate(const Dataset& ds, const std::string& out_prefix, std::ostream& out) {
    OutputGuard guard;
    const std::string g2o = out_prefix + ".g2o";
    const std::string truth = out_prefix + ".truth.g2o";
    guard.add(g2o);
    save_g2o(g2o, ds.graph, odometry_init(ds.graph));
    guard.add(truth);
    PoseGraph vertices_only;
    vertices_only.n = ds.graph.n;
    build_adjacency(vertices_only);
    save_g2o(truth, vertices_only, ds.truth);
    guard.release();
    out << "wrote " << g2o << " (" << ds.graph.n << " vertices, " << ds.graph.num_edges() << " edges) and " << truth
        << "\n";
    return 0;
}

// ---- solve ------------------------------------------------------------------

struct SolveArgs {
    std::string algo = "pieadmm";
    std::string init = "chord";
    std::string input;
    std::string truth;
    double beta = 0.0, tau1 = 0.0, tau2 = 0.0, tau3 = 0.0;
    std::string mode = "manual";
    double tol = -1.0;
    int max_iter = -1;
    int threads = -1;
    std::string out;
};

SolveOptions make_options(Algo algo, const std::string& mode, double beta, double tau1, double tau2, double tau3,
                          double tol, int max_iter, int threads) {
    SolveOptions o;
    o.algo = algo;
    o.admm.mode = mode == "theory" ? AdmmMode::Theory : AdmmMode::Manual;
    o.admm.beta = beta;
    o.admm.tau1 = tau1;
    o.admm.tau2 = tau2;
    o.admm.tau3 = tau3;
    if (tol >= 0.0) {
        o.admm.tol = tol;
        o.ls.tol = tol;
    }
    if (max_iter >= 0) {
        o.admm.max_iter = max_iter;
        o.ls.max_iter = max_iter;
    }
    o.admm.threads = threads;
    o.ls.threads = threads;
    return o;
}

int do_solve(const SolveArgs& a, std::ostream& out) {
    const Algo algo = parse_algo(a.algo);
    const G2oData data = load_g2o(a.input);
    std::vector<Pose> truth;
    if (!a.truth.empty()) {
        truth = load_poses(a.truth);
        if (static_cast<int>(truth.size()) != data.graph.n)
            throw Error("truth has " + std::to_string(truth.size()) + " poses, input has " +
                        std::to_string(data.graph.n));
    }
    std::vector<Pose> init;
    if (a.init == "chord")
        init = chordal_init(data.graph);
    else if (a.init == "odo")
        init = odometry_init(data.graph);
    else if (a.init == "file")
        init = data.poses;
    else
        throw std::invalid_argument("unknown init: " + a.init);

    const SolveOptions opt = make_options(algo, a.mode, a.beta, a.tau1, a.tau2, a.tau3, a.tol, a.max_iter,
                                          resolve_threads(a.threads));
    const SolveReport r = solve_graph(data.graph, init, opt, truth.empty() ? nullptr : &truth);

    OutputGuard guard;
    const std::string poses_path = a.out + ".poses.g2o";
    const std::string csv_path = a.out + ".convergence.csv";
    const std::string summary_path = a.out + ".summary.json";
    guard.add(poses_path);
    save_g2o(poses_path, data.graph, r.poses, data.original_ids);
    guard.add(csv_path);
    write_text(csv_path, convergence_csv(r));

    const IterationRecord& last = r.history.back();
    json final_metrics = {{"f", last.f},           {"g", last.g},     {"lagrangian", last.lagrangian},
                          {"phi", last.phi},       {"residual", last.residual}};
    if (!truth.empty()) {
        final_metrics["rel_err"] = aligned_rel_err(r.poses, truth);
        final_metrics["nrmse"] = number_or_null(safe_nrmse(r.poses, truth));
    } else {
        final_metrics["rel_err"] = nullptr;
        final_metrics["nrmse"] = nullptr;
    }
    const json summary = {{"algo", algo_name(algo)},
                          {"init", a.init},
                          {"input", a.input},
                          {"n", data.graph.n},
                          {"m", data.graph.num_edges()},
                          {"params", params_json(opt, r)},
                          {"iterations", r.iterations},
                          {"converged", r.converged},
                          {"status", r.status},
                          {"final", final_metrics},
                          {"wall_time_s", r.wall_s}};
    guard.add(summary_path);
    write_text(summary_path, summary.dump(2) + "\n");
    guard.release();
    out << algo_name(algo) << ": " << r.iterations << " iterations, status " << r.status << ", cost "
        << last.f + last.g;
    if (!truth.empty()) out << ", rel_err " << final_metrics["rel_err"].get<double>();
    out << "\n";
    return 0;
}

// ---- eval -------------------------------------------------------------------

int do_eval(const std::string& est_path, const std::string& truth_path, const std::string& align, std::ostream& out) {
    const std::vector<Pose> est = load_poses(est_path);
    const std::vector<Pose> truth = load_poses(truth_path);
    if (est.size() != truth.size())
        throw Error("length mismatch: estimate has " + std::to_string(est.size()) + " poses, truth has " +
                    std::to_string(truth.size()));
    const AlignMode mode = align == "none" ? AlignMode::None : AlignMode::Anchor0;
    const std::vector<Pose> aligned = align_to_truth(est, truth, mode);
    double nr = std::numeric_limits<double>::quiet_NaN();
    try {
        nr = nrmse(aligned, truth);
    } catch (const DegenerateInput&) {
    }
    const PoseErrors pe = per_pose_errors(aligned, truth);
    const json j = {{"n", est.size()},
                    {"align", align},
                    {"rel_err", rel_err(aligned, truth)},
                    {"nrmse", number_or_null(nr)},
                    {"rotation_err_rad", quantiles(pe.rotation_rad)},
                    {"translation_err", quantiles(pe.translation)}};
    out << j.dump(2) << "\n";
    return 0;
}

// ---- bench ------------------------------------------------------------------

std::vector<double> grid_values(const json& grid, const char* key, double fallback) {
    if (!grid.contains(key)) return {fallback};
    const json& v = grid.at(key);
    if (v.is_array()) return v.get<std::vector<double>>();
    return {v.get<double>()};
}

struct BenchCell {
    std::string family;
    int size = 0;  // ring n or cube n_hat
    double p = 0.0;
    double sigma_r = 0.0;
    double sigma_t = 0.0;  // ring sigma_t or cube sigma_t_rel
};

int do_bench(const std::string& family, const std::string& grid_path, int runs, const std::string& out_dir,
             int threads, std::ostream& out) {
    std::ifstream gf(grid_path);
    if (!gf) throw Error("cannot open grid file " + grid_path);
    json grid;
    try {
        grid = json::parse(gf);
    } catch (const json::exception& e) {
        throw Error("invalid grid file " + grid_path + ": " + e.what());
    }
    if (runs < 1) throw std::invalid_argument("--runs must be >= 1");

    std::vector<std::string> algos = {"pieadmm", "mgn", "mlm"};
    if (grid.contains("algos")) algos = grid.at("algos").get<std::vector<std::string>>();
    for (const auto& name : algos) parse_algo(name);
    const std::string init = grid.value("init", std::string("chord"));
    const double tol = grid.value("tol", -1.0);
    const int max_iter = grid.value("max_iter", -1);

    std::vector<BenchCell> cells;
    if (family == "ring") {
        for (double n : grid_values(grid, "n", 100))
            for (double sr : grid_values(grid, "sigma_r", 0.01))
                for (double st : grid_values(grid, "sigma_t", 0.05))
                    cells.push_back({"ring", static_cast<int>(n), 0.0, sr, st});
    } else if (family == "cube") {
        for (double nh : grid_values(grid, "nhat", 3))
            for (double p : grid_values(grid, "p", 0.3))
                for (double sr : grid_values(grid, "sigma_r", 0.1))
                    for (double st : grid_values(grid, "sigma_t_rel", 0.1))
                        cells.push_back({"cube", static_cast<int>(nh), p, sr, st});
    } else {
        throw std::invalid_argument("unknown bench family: " + family);
    }

    fs::create_directories(out_dir);
    const std::string csv_path = (fs::path(out_dir) / "bench.csv").string();
    OutputGuard guard;
    guard.add(csv_path);
    std::ostringstream csv;
    csv << std::setprecision(10);
    csv << "family,size,p,sigma_r,sigma_t,algo,runs,ok_runs,rel_err,nrmse,time_s,iterations,errors\n";

    for (const BenchCell& c : cells) {
        std::vector<Dataset> data;
        for (int run = 0; run < runs; ++run) {
            if (c.family == "ring") {
                RingSpec s;
                s.n = c.size;
                s.sigma_r = c.sigma_r;
                s.sigma_t = c.sigma_t;
                s.seed = static_cast<std::uint64_t>(run);
                data.push_back(gen_ring(s));
            } else {
                CubeSpec s;
                s.n_hat = c.size;
                s.p_cube = c.p;
                s.sigma_r = c.sigma_r;
                s.sigma_t_rel = c.sigma_t;
                s.seed = static_cast<std::uint64_t>(run);
                data.push_back(gen_cube(s));
            }
        }
        for (const auto& name : algos) {
            const SolveOptions opt =
                make_options(parse_algo(name), "manual", 0, 0, 0, 0, tol, max_iter, threads);
            double sum_rel = 0.0, sum_nrmse = 0.0, sum_time = 0.0, sum_iter = 0.0;
            int ok = 0;
            std::string errors;
            for (int run = 0; run < runs; ++run) {
                const Dataset& ds = data[static_cast<std::size_t>(run)];
                try {
                    const std::vector<Pose> x0 =
                        init == "odo" ? odometry_init(ds.graph) : chordal_init(ds.graph);
                    const SolveReport r = solve_graph(ds.graph, x0, opt);
                    sum_rel += aligned_rel_err(r.poses, ds.truth);
                    sum_nrmse += safe_nrmse(r.poses, ds.truth);
                    sum_time += r.wall_s;
                    sum_iter += r.iterations;
                    ++ok;
                } catch (const std::exception& e) {
                    if (!errors.empty()) errors += "; ";
                    errors += "seed " + std::to_string(run) + ": " + e.what();
                }
            }
            for (char& ch : errors)
                if (ch == ',' || ch == '\n') ch = ' ';
            const double k = ok > 0 ? ok : std::numeric_limits<double>::quiet_NaN();
            csv << c.family << ',' << c.size << ',' << c.p << ',' << c.sigma_r << ',' << c.sigma_t << ',' << name << ','
                << runs << ',' << ok << ',' << sum_rel / k << ',' << sum_nrmse / k << ',' << sum_time / k << ','
                << sum_iter / k << ',' << errors << '\n';
            out << c.family << " size " << c.size << " sigma_r " << c.sigma_r << " sigma_t " << c.sigma_t << " "
                << name << ": rel_err " << sum_rel / k << " (" << ok << "/" << runs << " ok)\n";
        }
    }
    write_text(csv_path, csv.str());
    guard.release();
    return 0;
}

}  // namespace

Algo parse_algo(const std::string& name) {
    if (name == "pieadmm") return Algo::PieAdmm;
    if (name == "mgn") return Algo::GaussNewton;
    if (name == "mlm") return Algo::LevenbergMarquardt;
    throw std::invalid_argument("unknown algo: " + name);
}

std::string algo_name(Algo algo) {
    switch (algo) {
        case Algo::PieAdmm: return "pieadmm";
        case Algo::GaussNewton: return "mgn";
        case Algo::LevenbergMarquardt: return "mlm";
    }
    return "?";
}

int resolve_threads(int flag_value) {
    if (flag_value >= 0) return flag_value;
    if (const char* env = std::getenv("PGO_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v >= 0) return v;
        } catch (const std::exception&) {
        }
    }
    return 0;
}

SolveReport solve_graph(const PoseGraph& graph, const std::vector<Pose>& init, const SolveOptions& options,
                        const std::vector<Pose>* truth) {
    SolveReport r;
    const auto start = std::chrono::steady_clock::now();
    if (options.algo == Algo::PieAdmm) {
        AdmmCallback cb;
        if (truth) cb = [&](const IterationRecord&, const AdmmState& s) {
            r.rel_err.push_back(aligned_rel_err(s.vars.poses(), *truth));
        };
        AdmmResult res = pieadmm_solve(graph, init, options.admm, cb);
        r.poses = std::move(res.poses);
        r.history.push_back(res.state.initial);
        r.history.insert(r.history.end(), res.state.history.begin(), res.state.history.end());
        r.iterations = static_cast<int>(res.state.history.size());
        r.converged = res.converged;
        r.status = res.converged ? "converged" : "max_iterations";
        r.admm = res.params;
    } else {
        LsCallback cb;
        if (truth) cb = [&](const IterationRecord&, const std::vector<Pose>& poses) {
            r.rel_err.push_back(aligned_rel_err(poses, *truth));
        };
        LsResult res = options.algo == Algo::GaussNewton ? gauss_newton_solve(graph, init, options.ls, cb)
                                                         : levenberg_marquardt_solve(graph, init, options.ls, cb);
        r.poses = std::move(res.poses);
        r.history = std::move(res.history);
        r.iterations = res.iterations;
        r.converged = res.status == LsStatus::Converged;
        r.status = to_string(res.status);
    }
    r.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pose graph optimization toolkit", "pgo"};
    app.require_subcommand(1);

    // generate
    GenerateArgs gen;
    CLI::App* generate = app.add_subcommand("generate", "Generate a synthetic dataset");
    generate->require_subcommand(1);
    CLI::App* g_ring = generate->add_subcommand("ring", "Planar ring");
    g_ring->add_option("--n", gen.n, "Pose count")->check(CLI::Range(3, 100000000));
    g_ring->add_option("--sigma-r", gen.sigma_r, "Rotation noise")->check(CLI::NonNegativeNumber);
    g_ring->add_option("--sigma-t", gen.sigma_t, "Translation noise")->check(CLI::NonNegativeNumber);
    CLI::App* g_cube = generate->add_subcommand("cube", "Cube grid walk");
    g_cube->add_option("--nhat", gen.nhat, "Grid side")->check(CLI::Range(2, 1000));
    g_cube->add_option("--p", gen.p, "Loop-closure probability")->check(CLI::Range(0.0, 1.0));
    g_cube->add_option("--sigma-r", gen.sigma_r, "Rotation noise")->check(CLI::NonNegativeNumber);
    g_cube->add_option("--sigma-t-rel", gen.sigma_t_rel, "Translation noise times nhat")
        ->check(CLI::NonNegativeNumber);
    for (CLI::App* g : {g_ring, g_cube}) {
        g->add_option("--seed", gen.seed, "Random seed");
        g->add_option("--kappa-convention", gen.convention, "inverse-variance or literal")
            ->check(CLI::IsMember({"inverse-variance", "literal"}));
        g->add_option("--out", gen.out, "Output prefix")->required();
    }

    // solve
    SolveArgs sa;
    CLI::App* solve = app.add_subcommand("solve", "Optimize a pose graph");
    solve->add_option("--algo", sa.algo, "pieadmm, mgn or mlm")->check(CLI::IsMember({"pieadmm", "mgn", "mlm"}));
    solve->add_option("--init", sa.init, "chord, odo or file")->check(CLI::IsMember({"chord", "odo", "file"}));
    solve->add_option("--input", sa.input, "Input g2o file")->required();
    solve->add_option("--truth", sa.truth, "Ground-truth g2o file");
    solve->add_option("--beta", sa.beta, "Penalty parameter")->check(CLI::NonNegativeNumber);
    solve->add_option("--tau1", sa.tau1, "Proximal weight for p")->check(CLI::NonNegativeNumber);
    solve->add_option("--tau2", sa.tau2, "Proximal weight for q")->check(CLI::NonNegativeNumber);
    solve->add_option("--tau3", sa.tau3, "Proximal weight for t")->check(CLI::NonNegativeNumber);
    solve->add_option("--mode", sa.mode, "theory or manual")->check(CLI::IsMember({"theory", "manual"}));
    solve->add_option("--tol", sa.tol, "Stopping tolerance")->check(CLI::NonNegativeNumber);
    solve->add_option("--max-iter", sa.max_iter, "Iteration cap")->check(CLI::NonNegativeNumber);
    solve->add_option("--threads", sa.threads, "Worker threads (0 = all)")->check(CLI::NonNegativeNumber);
    solve->add_option("--out", sa.out, "Output prefix")->required();

    // eval
    std::string est_path, truth_path, align = "anchor0";
    CLI::App* eval = app.add_subcommand("eval", "Compare an estimate with ground truth");
    eval->add_option("--est", est_path, "Estimate g2o file")->required();
    eval->add_option("--truth", truth_path, "Ground-truth g2o file")->required();
    eval->add_option("--align", align, "anchor0 or none")->check(CLI::IsMember({"anchor0", "none"}));

    // bench
    std::string family, grid_path, out_dir;
    int runs = 5, bench_threads = -1;
    CLI::App* bench = app.add_subcommand("bench", "Sweep a noise grid");
    bench->add_option("family", family, "ring or cube")->required()->check(CLI::IsMember({"ring", "cube"}));
    bench->add_option("--grid", grid_path, "Grid JSON file")->required();
    bench->add_option("--runs", runs, "Runs per cell")->check(CLI::PositiveNumber);
    bench->add_option("--out", out_dir, "Output directory")->required();
    bench->add_option("--threads", bench_threads, "Worker threads (0 = all)")->check(CLI::NonNegativeNumber);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (generate->parsed()) {
            if (g_ring->parsed()) {
                RingSpec s;
                s.n = gen.n;
                s.sigma_r = gen.sigma_r;
                s.sigma_t = gen.sigma_t;
                s.seed = gen.seed;
                s.convention = parse_convention(gen.convention);
                return do_generate(gen_ring(s), gen.out, out);
            }
            CubeSpec s;
            s.n_hat = gen.nhat;
            s.p_cube = gen.p;
            s.sigma_r = gen.sigma_r;
            s.sigma_t_rel = gen.sigma_t_rel;
            s.seed = gen.seed;
            s.convention = parse_convention(gen.convention);
            return do_generate(gen_cube(s), gen.out, out);
        }
        if (solve->parsed()) return do_solve(sa, out);
        if (eval->parsed()) return do_eval(est_path, truth_path, align, out);
        if (bench->parsed()) return do_bench(family, grid_path, runs, out_dir, resolve_threads(bench_threads), out);
    } catch (const SolverDiverged& e) {
        err << "error: solver diverged: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        err << "error: numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
    return run(args, out, err);
}

}  // namespace pgo::cli

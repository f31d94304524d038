#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pgo/manifold_ls.hpp"
#include "pgo/pieadmm.hpp"
#include "pgo/pose_graph.hpp"

namespace pgo::cli {

enum class Algo { PieAdmm, GaussNewton, LevenbergMarquardt };

// "pieadmm", "mgn", "mlm". Throws std::invalid_argument otherwise.
Algo parse_algo(const std::string& name);
std::string algo_name(Algo algo);

struct SolveOptions {
    Algo algo = Algo::PieAdmm;
    AdmmParams admm;
    LsParams ls;
};

struct SolveReport {
    std::vector<Pose> poses;
    std::vector<IterationRecord> history;  // row 0 is the initial point
    std::vector<double> rel_err;           // per history row; empty without truth
    int iterations = 0;
    bool converged = false;
    std::string status;
    double wall_s = 0.0;
    AdmmParams admm;  // resolved values (PieADMM only)
};

// Runs one solver from init. When truth is given, the aligned Rel.Err of
// every iterate is recorded (and counted in wall_s).
SolveReport solve_graph(const PoseGraph& graph, const std::vector<Pose>& init, const SolveOptions& options,
                        const std::vector<Pose>* truth = nullptr);

// Thread count from the flag value, falling back to PGO_THREADS, then 0.
int resolve_threads(int flag_value);

// Entry point. args excludes the program name. Exit codes: 0 success,
// 1 usage or I/O error, 2 solver divergence.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pgo::cli

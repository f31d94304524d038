#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pgo/pose_graph.hpp"

namespace pgo {

struct G2oData {
    PoseGraph graph;                  // dense 0-based ids, adjacency built
    std::vector<Pose> poses;          // VERTEX_SE3:QUAT values, indexed by dense id
    std::vector<long long> original_ids;  // dense id -> id in the file
    int skipped_lines = 0;            // unknown tags
    int renormalized_quaternions = 0; // |q| drifted from 1 by more than 1e-6
    bool dropped_cross_information = false;  // nonzero translation/rotation info coupling
};

/*
 * VERTEX_SE3:QUAT id x y z qx qy qz qw
 * EDGE_SE3:QUAT   i j tx ty tz qx qy qz qw  + 21 upper-triangular info entries
 *
 * Blank lines and lines starting with '#' are ignored. Unknown tags are
 * skipped and counted. Throws ParseError (with line number) on malformed
 * lines, duplicate vertex ids or edges that reference missing vertices.
 */
G2oData read_g2o(std::istream& in);
G2oData load_g2o(const std::string& path);

// Writes vertices (using original_ids when given) then edges, 17 significant
// digits. Throws Error if the file cannot be written.
void write_g2o(std::ostream& out, const PoseGraph& graph, const std::vector<Pose>& poses,
               const std::vector<long long>& original_ids = {});
void save_g2o(const std::string& path, const PoseGraph& graph, const std::vector<Pose>& poses,
              const std::vector<long long>& original_ids = {});

}  // namespace pgo

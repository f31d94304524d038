#include "pgo/g2o.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "pgo/errors.hpp"

namespace pgo {

namespace {

struct RawEdge {
    long long a = 0;
    long long b = 0;
    Vec3 t = Vec3::Zero();
    Quaternion q;
    Mat6 info = Mat6::Zero();
    int line = 0;
};

template <typename T>
void read_field(std::istringstream& ss, T& value, int line, const char* tag) {
    if (!(ss >> value)) throw ParseError(std::string("truncated or non-numeric ") + tag + " line", line);
}

// Normalizes q, counting it when the file value was visibly off the sphere.
UnitQuaternion checked_unit(const Quaternion& q, int line, int& renormalized) {
    if (!q.is_finite()) throw ParseError("non-finite quaternion", line);
    const double n = qnorm(q);
    if (n <= 1e-15) throw ParseError("zero quaternion", line);
    if (std::abs(n - 1.0) > 1e-6) ++renormalized;
    return UnitQuaternion(q);
}

}  // namespace

G2oData read_g2o(std::istream& in) {
    G2oData data;
    std::unordered_map<long long, int> dense;
    std::vector<RawEdge> raw_edges;

    std::string text;
    int line = 0;
    while (std::getline(in, text)) {
        ++line;
        std::istringstream ss(text);
        std::string tag;
        if (!(ss >> tag) || tag[0] == '#') continue;

        if (tag == "VERTEX_SE3:QUAT") {
            long long id = 0;
            Pose pose;
            Quaternion q;
            read_field(ss, id, line, "vertex");
            for (int k = 0; k < 3; ++k) read_field(ss, pose.t(k), line, "vertex");
            read_field(ss, q.x, line, "vertex");
            read_field(ss, q.y, line, "vertex");
            read_field(ss, q.z, line, "vertex");
            read_field(ss, q.w, line, "vertex");
            if (!pose.t.allFinite()) throw ParseError("non-finite vertex translation", line);
            pose.q = checked_unit(q, line, data.renormalized_quaternions);
            if (!dense.emplace(id, static_cast<int>(data.poses.size())).second)
                throw ParseError("duplicate vertex id " + std::to_string(id), line);
            data.poses.push_back(pose);
            data.original_ids.push_back(id);
        } else if (tag == "EDGE_SE3:QUAT") {
            RawEdge e;
            e.line = line;
            read_field(ss, e.a, line, "edge");
            read_field(ss, e.b, line, "edge");
            for (int k = 0; k < 3; ++k) read_field(ss, e.t(k), line, "edge");
            read_field(ss, e.q.x, line, "edge");
            read_field(ss, e.q.y, line, "edge");
            read_field(ss, e.q.z, line, "edge");
            read_field(ss, e.q.w, line, "edge");
            for (int r = 0; r < 6; ++r) {
                for (int c = r; c < 6; ++c) {
                    read_field(ss, e.info(r, c), line, "edge");
                    e.info(c, r) = e.info(r, c);
                }
            }
            if (!e.t.allFinite() || !e.info.allFinite()) throw ParseError("non-finite edge value", line);
            raw_edges.push_back(e);
        } else {
            ++data.skipped_lines;
        }
    }

    data.graph.n = static_cast<int>(data.poses.size());
    data.graph.edges.reserve(raw_edges.size());
    for (const RawEdge& r : raw_edges) {
        const auto ia = dense.find(r.a);
        const auto ib = dense.find(r.b);
        if (ia == dense.end() || ib == dense.end())
            throw ParseError("edge references missing vertex " + std::to_string(ia == dense.end() ? r.a : r.b),
                             r.line);
        if (ia->second == ib->second) throw ParseError("self-loop edge", r.line);
        Edge e;
        e.i = ia->second;
        e.j = ib->second;
        e.t_ij = r.t;
        e.q_ij = checked_unit(r.q, r.line, data.renormalized_quaternions);
        try {
            std::tie(e.sigma1, e.sigma2) = info_to_sigmas(r.info);
        } catch (const std::invalid_argument& ex) {
            throw ParseError(ex.what(), r.line);
        }
        if (r.info.block<3, 3>(0, 3).cwiseAbs().maxCoeff() > 0.0) data.dropped_cross_information = true;
        data.graph.edges.push_back(e);
    }
    build_adjacency(data.graph);
    return data;
}

G2oData load_g2o(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return read_g2o(in);
}

void write_g2o(std::ostream& out, const PoseGraph& graph, const std::vector<Pose>& poses,
               const std::vector<long long>& original_ids) {
    if (!original_ids.empty() && original_ids.size() != poses.size())
        throw Error("write_g2o: original_ids length does not match poses");
    auto id_of = [&](int v) -> long long {
        return original_ids.empty() ? v : original_ids[static_cast<std::size_t>(v)];
    };

    out << std::setprecision(17);
    for (std::size_t v = 0; v < poses.size(); ++v) {
        const Pose& p = poses[v];
        out << "VERTEX_SE3:QUAT " << id_of(static_cast<int>(v)) << ' ' << p.t(0) << ' ' << p.t(1) << ' '
            << p.t(2) << ' ' << p.q.x() << ' ' << p.q.y() << ' ' << p.q.z() << ' ' << p.q.w() << '\n';
    }
    for (const Edge& e : graph.edges) {
        const Mat6 info = sigmas_to_info(e.sigma1, e.sigma2);
        out << "EDGE_SE3:QUAT " << id_of(e.i) << ' ' << id_of(e.j) << ' ' << e.t_ij(0) << ' ' << e.t_ij(1)
            << ' ' << e.t_ij(2) << ' ' << e.q_ij.x() << ' ' << e.q_ij.y() << ' ' << e.q_ij.z() << ' '
            << e.q_ij.w();
        for (int r = 0; r < 6; ++r)
            for (int c = r; c < 6; ++c) out << ' ' << info(r, c);
        out << '\n';
    }
}

void save_g2o(const std::string& path, const PoseGraph& graph, const std::vector<Pose>& poses,
              const std::vector<long long>& original_ids) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    write_g2o(out, graph, poses, original_ids);
    out.flush();
    if (!out) throw Error("write failed: " + path);
}

}  // namespace pgo

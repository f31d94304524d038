#include "pgo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>

namespace pgo {

namespace {

UnitQuaternion yaw_quaternion(double yaw) { return {std::cos(0.5 * yaw), 0.0, 0.0, std::sin(0.5 * yaw)}; }

UnitQuaternion random_rotation(std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (;;) {
        const Vec4 v(normal(rng), normal(rng), normal(rng), normal(rng));
        if (v.norm() > 1e-6) return UnitQuaternion::from_vec(v);
    }
}

Edge make_edge(int i, int j) {
    Edge e;
    e.i = i;
    e.j = j;
    return e;
}

}  // namespace

void perturb_measurements(const std::vector<Pose>& truth, std::vector<Edge>& edges, double sigma_r, double sigma_t,
                          KappaConvention convention, std::mt19937_64& rng) {
    if (sigma_r < 0.0 || sigma_t < 0.0) throw std::invalid_argument("noise levels must be >= 0");
    std::normal_distribution<double> normal(0.0, 1.0);
    const double kappa = sigma_r > 0.0 ? kappa_from_sigma(sigma_r, convention) : 1.0;
    const double wt = sigma_t > 0.0 ? 1.0 / (sigma_t * sigma_t) : 1.0;

    for (Edge& e : edges) {
        const Pose& pi = truth.at(static_cast<std::size_t>(e.i));
        const Pose& pj = truth.at(static_cast<std::size_t>(e.j));
        e.t_ij = rotate_vec(pi.q.conj(), pj.t - pi.t);
        e.q_ij = pi.q.conj() * pj.q;
        if (sigma_t > 0.0) {
            const double a = normal(rng);
            const double b = normal(rng);
            const double c = normal(rng);
            e.t_ij += sigma_t * Vec3(a, b, c);
        }
        if (sigma_r > 0.0) e.q_ij = e.q_ij * sample_rotation_noise(sigma_r, convention, rng);

        e.sigma1 = Mat4::Identity();
        e.sigma1.block<3, 3>(1, 1) = wt * Mat3::Identity();
        e.sigma2 = kappa * Mat4::Identity();
    }
}

void perturb_measurements(const std::vector<Pose>& truth, std::vector<Edge>& edges, double sigma_r, double sigma_t,
                          std::uint64_t seed, KappaConvention convention) {
    std::mt19937_64 rng(seed);
    perturb_measurements(truth, edges, sigma_r, sigma_t, convention, rng);
}

Dataset gen_ring(const RingSpec& spec) {
    if (spec.n < 3) throw std::invalid_argument("ring needs n >= 3");
    if (!(spec.radius > 0.0)) throw std::invalid_argument("ring radius must be > 0");
    Dataset ds;
    ds.truth.resize(static_cast<std::size_t>(spec.n));
    for (int k = 0; k < spec.n; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / spec.n;
        Pose& p = ds.truth[static_cast<std::size_t>(k)];
        p.t = Vec3(spec.radius * std::cos(theta), spec.radius * std::sin(theta), 0.0);
        p.q = yaw_quaternion(theta + 0.5 * std::numbers::pi);
    }
    ds.graph.n = spec.n;
    for (int k = 0; k < spec.n; ++k) ds.graph.edges.push_back(make_edge(k, (k + 1) % spec.n));
    std::mt19937_64 rng(spec.seed);
    perturb_measurements(ds.truth, ds.graph.edges, spec.sigma_r, spec.sigma_t, spec.convention, rng);
    build_adjacency(ds.graph);
    return ds;
}

Dataset gen_cube(const CubeSpec& spec) {
    const int n = spec.n_hat;
    if (n < 2) throw std::invalid_argument("cube needs n_hat >= 2");
    if (spec.p_cube < 0.0 || spec.p_cube > 1.0) throw std::invalid_argument("p_cube must lie in [0, 1]");

    // Serpentine layer order, reversed on odd layers.
    std::vector<Eigen::Vector2i> layer;
    for (int y = 0; y < n; ++y)
        for (int k = 0; k < n; ++k) layer.emplace_back(y % 2 == 0 ? k : n - 1 - k, y);
    std::vector<Eigen::Vector3i> cells;
    for (int z = 0; z < n; ++z) {
        for (int k = 0; k < n * n; ++k) {
            const auto& xy = layer[static_cast<std::size_t>(z % 2 == 0 ? k : n * n - 1 - k)];
            cells.emplace_back(xy(0), xy(1), z);
        }
    }
    std::vector<int> visit(static_cast<std::size_t>(n * n * n));
    auto flat = [n](const Eigen::Vector3i& c) { return (c(2) * n + c(1)) * n + c(0); };
    for (std::size_t k = 0; k < cells.size(); ++k) visit[static_cast<std::size_t>(flat(cells[k]))] = static_cast<int>(k);

    std::mt19937_64 rng(spec.seed);
    Dataset ds;
    const double spacing = 2.0 / (n - 1);
    ds.truth.resize(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
        ds.truth[k].t = spacing * cells[k].cast<double>() - Vec3::Ones();
        ds.truth[k].q = random_rotation(rng);
    }

    ds.graph.n = static_cast<int>(cells.size());
    for (int k = 0; k + 1 < ds.graph.n; ++k) ds.graph.edges.push_back(make_edge(k, k + 1));
    std::bernoulli_distribution keep(spec.p_cube);
    for (std::size_t a = 0; a < cells.size(); ++a) {
        for (int axis = 0; axis < 3; ++axis) {
            Eigen::Vector3i nb = cells[a];
            nb(axis) += 1;
            if (nb(axis) >= n) continue;
            const int ia = static_cast<int>(a);
            const int ib = visit[static_cast<std::size_t>(flat(nb))];
            if (std::abs(ia - ib) == 1) continue;  // already on the path
            const int lo = std::min(ia, ib);
            const int hi = std::max(ia, ib);
            if (keep(rng)) ds.graph.edges.push_back(make_edge(lo, hi));
            if (keep(rng)) ds.graph.edges.push_back(make_edge(hi, lo));
        }
    }
    perturb_measurements(ds.truth, ds.graph.edges, spec.sigma_r, spec.sigma_t_rel / n, spec.convention, rng);
    build_adjacency(ds.graph);
    return ds;
}

double expected_cube_edges(int n_hat, double p_cube) {
    const double n = n_hat;
    return 2.0 * (2.0 * n * n * n - 3.0 * n * n + 1.0) * p_cube + n * n * n - 1.0;
}

}  // namespace pgo

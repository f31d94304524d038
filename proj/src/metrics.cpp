#include "pgo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "pgo/errors.hpp"

namespace pgo {

namespace {

void check_lengths(const std::vector<Pose>& est, const std::vector<Pose>& truth) {
    if (est.size() != truth.size())
        throw std::invalid_argument("estimate has " + std::to_string(est.size()) + " poses, truth has " +
                                    std::to_string(truth.size()));
}

double error_numerator(const std::vector<Pose>& est, const std::vector<Pose>& truth) {
    double dq = 0.0, dt = 0.0;
    for (std::size_t k = 0; k < est.size(); ++k) {
        dq += (est[k].q.vec() - truth[k].q.vec()).squaredNorm();
        dt += (est[k].t - truth[k].t).squaredNorm();
    }
    return std::sqrt(dq) + std::sqrt(dt);
}

}  // namespace

std::vector<Pose> align_to_truth(const std::vector<Pose>& est, const std::vector<Pose>& truth, AlignMode mode) {
    check_lengths(est, truth);
    if (mode == AlignMode::None || est.empty()) return est;
    const UnitQuaternion qa = truth[0].q * est[0].q.conj();
    const Vec3 ta = truth[0].t - rotate_vec(qa, est[0].t);
    std::vector<Pose> out(est.size());
    for (std::size_t k = 0; k < est.size(); ++k) {
        out[k].q = qa * est[k].q;
        out[k].t = rotate_vec(qa, est[k].t) + ta;
        if (qdot(out[k].q, truth[k].q) < 0.0) out[k].q = -out[k].q;
    }
    return out;
}

double rel_err(const std::vector<Pose>& est, const std::vector<Pose>& truth) {
    check_lengths(est, truth);
    double q0 = 0.0, t0 = 0.0;
    for (const Pose& p : truth) {
        q0 += p.q.vec().squaredNorm();
        t0 += p.t.squaredNorm();
    }
    const double denom = std::sqrt(q0) + std::sqrt(t0);
    if (!(denom > 0.0)) throw DegenerateInput("rel_err: empty truth");
    return error_numerator(est, truth) / denom;
}

double nrmse(const std::vector<Pose>& est, const std::vector<Pose>& truth) {
    check_lengths(est, truth);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const Pose& p : truth) {
        lo = std::min(lo, p.t.minCoeff());
        hi = std::max(hi, p.t.maxCoeff());
    }
    if (truth.empty() || !(hi > lo)) throw DegenerateInput("nrmse: truth translations have zero range");
    return error_numerator(est, truth) / ((hi - lo) * std::sqrt(static_cast<double>(truth.size())));
}

PoseErrors per_pose_errors(const std::vector<Pose>& est, const std::vector<Pose>& truth) {
    check_lengths(est, truth);
    PoseErrors e;
    for (std::size_t k = 0; k < est.size(); ++k) {
        e.rotation_rad.push_back(rotation_angle_between(est[k].q, truth[k].q));
        e.translation.push_back((est[k].t - truth[k].t).norm());
    }
    return e;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double aligned_rel_err(const std::vector<Pose>& est, const std::vector<Pose>& truth) {
    return rel_err(align_to_truth(est, truth, AlignMode::Anchor0), truth);
}

}  // namespace pgo

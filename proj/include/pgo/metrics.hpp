#pragma once

#include <vector>

#include "pgo/pose_graph.hpp"

namespace pgo {

enum class AlignMode { Anchor0, None };

/*
 * Anchor0: left-multiply every estimate by the rigid transform taking
 * estimate 0 onto truth 0, then flip each quaternion into the hemisphere of
 * its truth counterpart. None: returns est unchanged.
 */
std::vector<Pose> align_to_truth(const std::vector<Pose>& est, const std::vector<Pose>& truth, AlignMode mode);

// (|q - q0| + |t - t0|) / (|q0| + |t0|), norms stacked over all poses.
double rel_err(const std::vector<Pose>& est, const std::vector<Pose>& truth);

// (|q - q0| + |t - t0|) / ((max t0 - min t0) sqrt(n)), extremes over all
// truth coordinates. Throws DegenerateInput when max t0 == min t0.
double nrmse(const std::vector<Pose>& est, const std::vector<Pose>& truth);

struct PoseErrors {
    std::vector<double> rotation_rad;  // geodesic angle per pose
    std::vector<double> translation;   // Euclidean distance per pose
};

PoseErrors per_pose_errors(const std::vector<Pose>& est, const std::vector<Pose>& truth);

// Linear-interpolated quantile, q in [0, 1]. Empty input gives 0.
double quantile(std::vector<double> values, double q);

// Anchor0 alignment followed by rel_err.
double aligned_rel_err(const std::vector<Pose>& est, const std::vector<Pose>& truth);

}  // namespace pgo

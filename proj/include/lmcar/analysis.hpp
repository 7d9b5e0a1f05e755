#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "lmcar/dataset.hpp"

namespace lmcar {

/// Per-column magnitudes of a transform. The normalized vector sums to 1
/// and is the object all downstream analysis consumes.
struct MagnitudeProfile {
    Eigen::VectorXd column_norms;
    Eigen::VectorXd normalized;
};

struct GroupStat {
    std::string name;
    double mass = 0.0;           // sum of normalized magnitudes, in [0, 1]
    double kl_vs_uniform = 0.0;  // nats, within-group distribution vs uniform
    bool zero_mass = false;
};

struct GroupSummary {
    std::vector<GroupStat> stats; // one per group, layout order
};

/// Diagonal Gaussian over normalized magnitude vectors across runs.
struct GaussianMagnitudeModel {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance; // floored, strictly positive
};

/// Asymmetric KL matrix between per-affordance Gaussian models.
/// kl(a, b) treats row a as the reference distribution.
struct AssociationTable {
    std::vector<std::string> names; // canonical (sorted) order
    Eigen::MatrixXd kl;
    std::vector<std::vector<std::string>> top3; // per row, nearest others
};

/// Column l2 norms of the matrix plus their sum-1 normalization.
/// Rejects an identically zero matrix.
MagnitudeProfile magnitude_profile(const Eigen::MatrixXd& transform);

/// Profile built directly from a nonnegative magnitude vector (used for
/// averaged profiles).
MagnitudeProfile profile_from_magnitudes(const Eigen::VectorXd& magnitudes);

/// Mean of the normalized vectors of several profiles.
MagnitudeProfile mean_profile(const std::vector<MagnitudeProfile>& profiles);

/// Fraction of columns whose norm exceeds rel_threshold * max norm.
/// rel_threshold must lie in (0, 1).
double kept_fraction(const MagnitudeProfile& profile, double rel_threshold);

/// Per-group mass and within-group KL against the uniform distribution,
/// KL = sum p_i * ln(p_i * len) over the renormalized slice (0 ln 0 = 0).
/// Zero-mass groups report KL 0 and are flagged.
GroupSummary group_summary(const MagnitudeProfile& profile,
                           const std::vector<FeatureGroupSpec>& groups);

/// Per-dimension mean and population variance of the normalized
/// magnitude vectors; variance floored at 1e-12. Needs at least 2 runs.
GaussianMagnitudeModel fit_gaussian(const std::vector<MagnitudeProfile>& profiles);

/// Closed-form KL(P || Q) for diagonal Gaussians, in nats.
double kl_gaussian(const GaussianMagnitudeModel& p,
                   const GaussianMagnitudeModel& q);

/// Full pairwise KL table over affordances, rows and columns in sorted
/// name order; per row the up-to-3 nearest other affordances, distance
/// ties broken by name order.
AssociationTable associate(
    const std::map<std::string, GaussianMagnitudeModel>& models);

} // namespace lmcar

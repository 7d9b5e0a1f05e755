#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "lmcar/analysis.hpp"
#include "lmcar/dataset.hpp"

namespace lmcar {

struct PointImportance {
    Eigen::VectorXd values;     // c_j >= 0 per point
    Eigen::VectorXd normalized; // values / max, all 0 when flagged
    bool all_zero = false;
};

/// Importance of each point: the point-mapped slice of the normalized
/// magnitudes is renormalized jointly over all point-mapped groups, then
/// c_j sums, over those groups, the weight of the bin the point falls in.
PointImportance point_importance(const MagnitudeProfile& profile,
                                 const PointCloudFeatureMap& map,
                                 const std::vector<FeatureGroupSpec>& groups);

/// Red-blue gradient: t = normalized importance, color =
/// (round(255 t), 0, round(255 (1 - t))) with round-half-up.
std::vector<std::array<std::uint8_t, 3>> colorize(
    const PointImportance& importance);

/// ASCII PLY with x, y, z, red, green, blue vertex properties, point
/// order preserved. Rejects empty clouds.
void export_cloud(const Eigen::MatrixXd& points,
                  const std::vector<std::array<std::uint8_t, 3>>& colors,
                  const std::filesystem::path& path);

} // namespace lmcar

#include "lmcar/projection.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "lmcar/errors.hpp"
#include "lmcar/numio.hpp"

namespace lmcar {

PointImportance point_importance(const MagnitudeProfile& profile,
                                 const PointCloudFeatureMap& map,
                                 const std::vector<FeatureGroupSpec>& groups) {
    check_groups(groups, static_cast<int>(profile.normalized.size()));
    const int points = map.point_count();
    if (points < 1) {
        throw ValidationError("point cloud is empty");
    }

    std::vector<const FeatureGroupSpec*> mapped;
    double subset_mass = 0.0;
    for (const auto& g : groups) {
        if (!g.point_mapped) {
            continue;
        }
        if (map.assignments.find(g.name) == map.assignments.end()) {
            throw ValidationError("instance '" + map.instance_id +
                                  "': no assignments for point-mapped group '" +
                                  g.name + "'");
        }
        mapped.push_back(&g);
        subset_mass += profile.normalized.segment(g.offset, g.length).sum();
    }
    if (mapped.empty()) {
        throw ValidationError("no point-mapped groups in the layout");
    }
    for (const auto& [name, bins] : map.assignments) {
        bool known = false;
        for (const auto* g : mapped) {
            known = known || g->name == name;
        }
        if (!known) {
            throw ValidationError("instance '" + map.instance_id +
                                  "': assignments for '" + name +
                                  "' do not match any point-mapped group");
        }
        if (static_cast<int>(bins.size()) != points) {
            throw ValidationError(
                "instance '" + map.instance_id + "': group '" + name + "' has " +
                std::to_string(bins.size()) + " assignments for " +
                std::to_string(points) + " points");
        }
    }

    PointImportance out;
    out.values = Eigen::VectorXd::Zero(points);
    for (const auto* g : mapped) {
        const auto& bins = map.assignments.at(g->name);
        for (int j = 0; j < points; ++j) {
            if (bins[j] < 0 || bins[j] >= g->length) {
                throw ValidationError("instance '" + map.instance_id +
                                      "': bin " + std::to_string(bins[j]) +
                                      " out of range for group '" + g->name +
                                      "' of length " +
                                      std::to_string(g->length));
            }
            if (subset_mass > 0.0) {
                out.values[j] +=
                    profile.normalized[g->offset + bins[j]] / subset_mass;
            }
        }
    }

    const double peak = out.values.maxCoeff();
    if (peak > 0.0) {
        out.normalized = out.values / peak;
    } else {
        out.normalized = Eigen::VectorXd::Zero(points);
        out.all_zero = true;
    }
    return out;
}

std::vector<std::array<std::uint8_t, 3>> colorize(
    const PointImportance& importance) {
    std::vector<std::array<std::uint8_t, 3>> colors;
    colors.reserve(importance.normalized.size());
    for (Eigen::Index j = 0; j < importance.normalized.size(); ++j) {
        const double t = importance.normalized[j];
        const auto band = [](double x) {
            return static_cast<std::uint8_t>(std::floor(255.0 * x + 0.5));
        };
        colors.push_back({band(t), std::uint8_t{0}, band(1.0 - t)});
    }
    return colors;
}

void export_cloud(const Eigen::MatrixXd& points,
                  const std::vector<std::array<std::uint8_t, 3>>& colors,
                  const std::filesystem::path& path) {
    if (points.rows() < 1) {
        throw ValidationError("refusing to export an empty cloud");
    }
    if (points.cols() != 3) {
        throw ValidationError("points must have 3 coordinates");
    }
    if (static_cast<Eigen::Index>(colors.size()) != points.rows()) {
        throw ValidationError("color count does not match point count");
    }
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("cannot open '" + path.string() +
                              "' for writing");
    }
    out << "ply\n"
        << "format ascii 1.0\n"
        << "comment importance-colored cloud\n"
        << "element vertex " << points.rows() << "\n"
        << "property float x\n"
        << "property float y\n"
        << "property float z\n"
        << "property uchar red\n"
        << "property uchar green\n"
        << "property uchar blue\n"
        << "element face 0\n"
        << "property list uchar int vertex_indices\n"
        << "end_header\n";
    for (Eigen::Index j = 0; j < points.rows(); ++j) {
        out << format_double(points(j, 0)) << ' ' << format_double(points(j, 1))
            << ' ' << format_double(points(j, 2)) << ' '
            << static_cast<int>(colors[j][0]) << ' '
            << static_cast<int>(colors[j][1]) << ' '
            << static_cast<int>(colors[j][2]) << '\n';
    }
    if (!out) {
        throw ValidationError("write to '" + path.string() + "' failed");
    }
}

} // namespace lmcar

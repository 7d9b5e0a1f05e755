#include "lmcar/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lmcar/errors.hpp"

namespace lmcar {

namespace {
constexpr double kVarianceFloor = 1e-12;
}

MagnitudeProfile magnitude_profile(const Eigen::MatrixXd& transform) {
    if (transform.size() == 0) {
        throw ValidationError("transform is empty");
    }
    Eigen::VectorXd norms(transform.cols());
    for (Eigen::Index j = 0; j < transform.cols(); ++j) {
        norms[j] = transform.col(j).norm();
    }
    return profile_from_magnitudes(norms);
}

MagnitudeProfile profile_from_magnitudes(const Eigen::VectorXd& magnitudes) {
    if (magnitudes.size() == 0) {
        throw ValidationError("magnitude vector is empty");
    }
    if ((magnitudes.array() < 0.0).any()) {
        throw ValidationError("magnitudes must be non-negative");
    }
    const double total = magnitudes.sum();
    if (total <= 0.0) {
        throw ValidationError("all column magnitudes are zero");
    }
    MagnitudeProfile profile;
    profile.column_norms = magnitudes;
    profile.normalized = magnitudes / total;
    return profile;
}

MagnitudeProfile mean_profile(const std::vector<MagnitudeProfile>& profiles) {
    if (profiles.empty()) {
        throw ValidationError("no profiles to average");
    }
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(profiles.front().normalized.size());
    for (const auto& p : profiles) {
        if (p.normalized.size() != acc.size()) {
            throw ValidationError("profiles differ in dimension");
        }
        acc += p.normalized;
    }
    return profile_from_magnitudes(acc / static_cast<double>(profiles.size()));
}

double kept_fraction(const MagnitudeProfile& profile, double rel_threshold) {
    if (!(rel_threshold > 0.0 && rel_threshold < 1.0)) {
        throw ValidationError("rel_threshold must be in (0, 1)");
    }
    const double cutoff = rel_threshold * profile.column_norms.maxCoeff();
    const Eigen::Index kept =
        (profile.column_norms.array() > cutoff).count();
    return static_cast<double>(kept) /
           static_cast<double>(profile.column_norms.size());
}

GroupSummary group_summary(const MagnitudeProfile& profile,
                           const std::vector<FeatureGroupSpec>& groups) {
    check_groups(groups, static_cast<int>(profile.normalized.size()));
    GroupSummary summary;
    for (const auto& g : groups) {
        GroupStat stat;
        stat.name = g.name;
        const auto slice = profile.normalized.segment(g.offset, g.length);
        stat.mass = slice.sum();
        if (stat.mass <= 0.0) {
            stat.zero_mass = true;
        } else {
            double kl = 0.0;
            for (Eigen::Index i = 0; i < slice.size(); ++i) {
                const double p = slice[i] / stat.mass;
                if (p > 0.0) {
                    kl += p * std::log(p * static_cast<double>(g.length));
                }
            }
            stat.kl_vs_uniform = std::max(kl, 0.0);
        }
        summary.stats.push_back(std::move(stat));
    }
    return summary;
}

GaussianMagnitudeModel fit_gaussian(
    const std::vector<MagnitudeProfile>& profiles) {
    if (profiles.size() < 2) {
        throw ValidationError("need at least 2 profiles, got " +
                              std::to_string(profiles.size()));
    }
    const Eigen::Index dims = profiles.front().normalized.size();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dims);
    for (const auto& p : profiles) {
        if (p.normalized.size() != dims) {
            throw ValidationError("profiles differ in dimension");
        }
        mean += p.normalized;
    }
    mean /= static_cast<double>(profiles.size());

    Eigen::VectorXd var = Eigen::VectorXd::Zero(dims);
    for (const auto& p : profiles) {
        var += (p.normalized - mean).cwiseAbs2();
    }
    var /= static_cast<double>(profiles.size()); // population convention
    GaussianMagnitudeModel model;
    model.mean = mean;
    model.variance = var.cwiseMax(kVarianceFloor);
    return model;
}

double kl_gaussian(const GaussianMagnitudeModel& p,
                   const GaussianMagnitudeModel& q) {
    if (p.mean.size() != q.mean.size()) {
        throw ValidationError("Gaussian dimensions differ");
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j < p.mean.size(); ++j) {
        const double vp = p.variance[j];
        const double vq = q.variance[j];
        const double dm = q.mean[j] - p.mean[j];
        total += vp / vq + dm * dm / vq - 1.0 + std::log(vq / vp);
    }
    return 0.5 * total;
}

AssociationTable associate(
    const std::map<std::string, GaussianMagnitudeModel>& models) {
    if (models.size() < 2) {
        throw ValidationError("need at least 2 affordances to associate");
    }
    AssociationTable table;
    for (const auto& [name, model] : models) {
        (void)model;
        table.names.push_back(name); // std::map iterates in sorted order
    }
    const int a = static_cast<int>(table.names.size());
    table.kl = Eigen::MatrixXd::Zero(a, a);
    for (int i = 0; i < a; ++i) {
        for (int j = 0; j < a; ++j) {
            if (i == j) {
                continue;
            }
            table.kl(i, j) = kl_gaussian(models.at(table.names[i]),
                                         models.at(table.names[j]));
        }
    }
    for (int i = 0; i < a; ++i) {
        std::vector<int> others;
        for (int j = 0; j < a; ++j) {
            if (j != i) {
                others.push_back(j);
            }
        }
        // stable sort keeps name order among equal distances because
        // `others` is already name-ordered
        std::stable_sort(others.begin(), others.end(), [&](int x, int y) {
            return table.kl(i, x) < table.kl(i, y);
        });
        std::vector<std::string> nearest;
        for (int m = 0; m < static_cast<int>(others.size()) && m < 3; ++m) {
            nearest.push_back(table.names[others[m]]);
        }
        table.top3.push_back(std::move(nearest));
    }
    return table;
}

} // namespace lmcar

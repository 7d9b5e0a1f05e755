#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lmcar/errors.hpp"

namespace lmcar {

/// One contiguous block of feature dimensions produced by a single
/// descriptor. point_mapped groups have bins addressable from individual
/// point-cloud points (histogram bins, BoW codewords).
struct FeatureGroupSpec {
    std::string name;
    int offset = 0;
    int length = 0;
    bool point_mapped = false;
};

struct Dataset {
    Eigen::MatrixXd features;                 // N x D
    Eigen::MatrixXi labels;                   // N x A, entries 0/1
    std::vector<std::string> affordance_names;
    std::vector<std::string> dimension_names;
    std::vector<FeatureGroupSpec> groups;
    std::vector<std::string> instance_ids;
    bool standardized = false;

    int n() const { return static_cast<int>(features.rows()); }
    int dim() const { return static_cast<int>(features.cols()); }
    int affordance_count() const { return static_cast<int>(labels.cols()); }

    /// Index of a named affordance; throws ValidationError if unknown.
    int affordance_index(const std::string& name) const;
};

/// Per-dimension mean and population (1/N) standard deviation.
struct StandardizationParams {
    Eigen::VectorXd mean;
    Eigen::VectorXd std;
};

struct PointCloudFeatureMap {
    std::string instance_id;
    Eigen::MatrixXd points; // P x 3
    std::map<std::string, std::vector<int>> assignments;

    int point_count() const { return static_cast<int>(points.rows()); }
};

struct SyntheticSpec {
    std::array<int, 2> n_per_class{0, 0};
    int dims = 0; // serialized as "D"
    std::vector<int> informative_dims;
    double class_separation = 0.0;
    double noise_std = 1.0;
    std::uint64_t seed = 0;
};

/// Checks group disjointness, ordering, and coverage of [0, dims).
/// Appends one message per problem found.
void check_groups(const std::vector<FeatureGroupSpec>& groups, int dims,
                  std::vector<std::string>& issues);

/// Same checks; throws ValidationError listing every problem.
void check_groups(const std::vector<FeatureGroupSpec>& groups, int dims);

/// Runs every load-time check on the three files without throwing.
/// Returns the full list of problems; empty means the dataset is loadable.
std::vector<std::string> validate_dataset_files(
    const std::filesystem::path& features_path,
    const std::filesystem::path& labels_path,
    const std::filesystem::path& groups_path);

/// Loads and validates; throws ValidationError enumerating every problem.
Dataset load_dataset(const std::filesystem::path& features_path,
                     const std::filesystem::path& labels_path,
                     const std::filesystem::path& groups_path);

/// Canonical serialization (shortest round-trip number formatting).
/// save -> load -> save reproduces the files byte for byte.
void save_dataset(const Dataset& ds,
                  const std::filesystem::path& features_path,
                  const std::filesystem::path& labels_path,
                  const std::filesystem::path& groups_path);

/// Fits per-dimension mean and population std, returns the transformed
/// copy. Dimensions with (numerically) zero spread get std recorded as 1
/// and an identically zero output column. Throws if already standardized.
std::pair<Dataset, StandardizationParams> standardize(const Dataset& ds);

/// Applies previously fitted parameters (train-side fit, test-side apply).
Dataset apply_standardization(const Dataset& ds,
                              const StandardizationParams& params);

Eigen::VectorXd apply_standardization(const Eigen::VectorXd& x,
                                      const StandardizationParams& params);

struct SplitIndices {
    std::vector<int> train;
    std::vector<int> test;
};

/// Stratified train/test split on one affordance column. Each class is
/// split independently; the train count per class is
/// clamp(round(ratio * n_class), 1, n_class - 1), so both sides keep at
/// least one member of each class. Deterministic for a fixed seed.
SplitIndices split_indices(const Dataset& ds, int affordance, double ratio,
                           std::uint64_t seed);

std::pair<Dataset, Dataset> split(const Dataset& ds, int affordance,
                                  double ratio, std::uint64_t seed);

struct FoldIndices {
    std::vector<int> train;
    std::vector<int> validation;
};

/// Stratified k-fold partition: positives and negatives are shuffled and
/// dealt round-robin, so every instance lands in exactly one validation
/// fold and every fold holds at least one member of each class.
std::vector<FoldIndices> kfold(const Dataset& ds, int affordance, int k,
                               std::uint64_t seed);

/// Row subset preserving metadata and row order.
Dataset subset(const Dataset& ds, const std::vector<int>& rows);

/// Two-class dataset whose class means differ by class_separation along
/// the informative dimensions only. Returns the informative index list
/// for downstream oracles.
std::pair<Dataset, std::vector<int>> make_synthetic(const SyntheticSpec& spec);

PointCloudFeatureMap load_point_map(const std::filesystem::path& path);
void save_point_map(const PointCloudFeatureMap& map,
                    const std::filesystem::path& path);

std::vector<FeatureGroupSpec> load_groups(const std::filesystem::path& path);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);

} // namespace lmcar

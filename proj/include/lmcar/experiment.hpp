#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lmcar/classifier.hpp"
#include "lmcar/dataset.hpp"
#include "lmcar/optimizer.hpp"

namespace lmcar {

/// Full experiment description. The JSON file carries the same field
/// names; every field can be overridden by a CLI flag of the same name.
struct ExperimentConfig {
    std::filesystem::path features;
    std::filesystem::path labels;
    std::filesystem::path groups;
    std::filesystem::path out_dir;
    std::vector<std::string> affordances; // empty = all
    int n_splits = 25;
    double split_ratio = 0.7;
    int cv_folds = 5;
    std::vector<double> c_grid = {0.1, 0.5, 1.0, 5.0, 10.0};
    std::vector<double> lambda_grid = {0.0, 0.01, 0.1, 1.0, 10.0};
    std::vector<int> pca_grid; // empty = 0..min(D, 20)
    TrainConfig train;         // k, d, max_epochs, init_step, tol, norm_eps
    std::uint64_t master_seed = 1;
    int threads = 1;
    bool global_standardization = false;
    double kept_rel_threshold = 1e-3;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// The (c, lambda) grid in fixed order: c-major over c_grid, then
/// lambda_grid, with the base training settings applied to every point.
std::vector<TrainConfig> build_grid(const ExperimentConfig& config);

/// Baseline projection dimensions 0..min(dims, 20); 0 means identity.
std::vector<int> default_pca_grid(int dims);

struct RunRecord {
    std::string affordance;
    std::string method; // "lmca-r" or "knn"
    std::uint64_t split_seed = 0;
    EvalReport report;
};

struct ExperimentResult {
    std::vector<RunRecord> runs; // affordance-major, split, then method
};

/// The end-to-end protocol: for every (affordance, split) task derive a
/// seed from the master seed, split stratified 70/30, cross-validate c
/// and lambda on the training side, train, and score both the learned
/// transform and the PCA+kNN baseline on the held-out side. Writes
/// runs.csv, aggregate.csv, serialized models, per-split magnitude
/// profiles, and run_metadata.json (the only file with timestamps) under
/// out_dir. Identical config and master_seed give byte-identical result
/// files.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Per-affordance averaged profile plus group masses and KL-vs-uniform,
/// computed from serialized models under models_dir.
void write_feature_report(const std::filesystem::path& models_dir,
                          const std::filesystem::path& groups_path,
                          const std::filesystem::path& out_dir);

/// Gaussian fit over each affordance's per-split profiles, pairwise KL
/// matrix CSV, and a top-3 nearest-affordance text table.
void write_association_report(const std::filesystem::path& models_dir,
                              const std::filesystem::path& out_dir);

/// One importance-colored PLY per point-cloud map, using the model's
/// transform magnitudes.
void project_clouds(const std::filesystem::path& model_path,
                    const std::filesystem::path& groups_path,
                    const std::vector<std::filesystem::path>& cloud_paths,
                    const std::filesystem::path& out_dir);

/// Generates the synthetic dataset described by the generator parameter
/// file (the synth subcommand's --spec JSON) and writes it as a loadable
/// dataset plus the ground-truth informative dimensions.
void write_synthetic(const std::filesystem::path& spec_path,
                     const std::filesystem::path& out_dir);

} // namespace lmcar

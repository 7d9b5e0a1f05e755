#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "lmcar/dataset.hpp"
#include "lmcar/optimizer.hpp"

namespace lmcar {

struct EvalReport {
    double f1 = 0.0;
    double accuracy = 0.0;
    int tp = 0;
    int fp = 0;
    int tn = 0;
    int fn = 0;
    double kept_fraction = 0.0;
};

/// Majority vote among the config.k nearest training points in the
/// transformed space. Distance ties resolve toward the lower training
/// index; an even-vote tie resolves to the nearest neighbor's label.
/// The query must already be standardized with the model's params.
int knn_predict(const TrainedModel& model, const Eigen::VectorXd& query);

/// Scores the model on raw (unstandardized) test rows: applies the
/// model's standardization, predicts per instance, and aggregates.
/// kept_fraction comes from the transform's magnitude profile at the
/// given relative threshold.
EvalReport evaluate(const TrainedModel& model,
                    const Eigen::MatrixXd& raw_features,
                    const Eigen::VectorXi& labels,
                    double kept_rel_threshold = 1e-3);

/// Top-d principal directions of the features (rows of the result);
/// d = 0 yields the identity (no projection).
Eigen::MatrixXd pca_project(const Eigen::MatrixXd& features, int d);

/// Builds the kNN baseline: standardized training features under a PCA
/// basis of the given dimension, packaged as a TrainedModel so the same
/// prediction and scoring path applies.
TrainedModel make_pca_baseline(const Dataset& train_std, int affordance,
                               int pca_dim, int k,
                               const StandardizationParams& params);

/// Grid search by mean validation F1 over stratified folds. The train
/// set is raw; folds are standardized fit-on-train unless `fixed`
/// supplies pre-fit parameters (then applied as-is to both sides).
/// Ties prefer larger lambda, then larger c, then earlier grid order.
TrainConfig cross_validate(const Dataset& train_set, int affordance,
                           const std::vector<TrainConfig>& grid, int folds,
                           std::uint64_t seed,
                           const std::optional<StandardizationParams>& fixed =
                               std::nullopt);

/// Same protocol for the baseline's PCA dimension; ties prefer earlier
/// grid order.
int cross_validate_pca_dim(const Dataset& train_set, int affordance,
                           const std::vector<int>& dims, int k, int folds,
                           std::uint64_t seed,
                           const std::optional<StandardizationParams>& fixed =
                               std::nullopt);

} // namespace lmcar

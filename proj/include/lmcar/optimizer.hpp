#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "lmcar/dataset.hpp"

namespace lmcar {

struct TrainConfig {
    int k = 3;              // target neighbors per instance
    double c = 1.0;         // push-term weight
    double lambda = 0.0;    // column-sparsity weight
    int d = 3;              // output dimensionality
    int max_epochs = 200;
    double init_step = 1e-3;
    double tol = 1e-6;      // relative loss-change stopping threshold
    double norm_eps = 1e-8; // smoothing for the column norms
    std::uint64_t seed = 0;
};

void check_config(const TrainConfig& config, int dims);

/// The learned d x D transform; acts on standardized features.
struct LinearTransform {
    Eigen::MatrixXd matrix;

    int out_dim() const { return static_cast<int>(matrix.rows()); }
    int in_dim() const { return static_cast<int>(matrix.cols()); }
};

/// Target-neighbor pairs (i, j): j is one of the k nearest same-class
/// instances of i in the untransformed space. Pairs are grouped by i in
/// ascending order. Impostors are implied: every instance with a
/// different label from i.
struct TripleSet {
    std::vector<std::pair<int, int>> target_pairs;
};

struct TrainedModel {
    LinearTransform transform;
    Eigen::MatrixXd train_features; // standardized, retained for kNN
    Eigen::VectorXi train_labels;   // 0/1
    TrainConfig config;
    std::vector<double> loss_trace; // accepted-step losses, non-increasing
    StandardizationParams standardization;
    bool step_underflow = false; // no accepted step was possible
};

/// k nearest same-class neighbors of every instance, distances taken in
/// the given (untransformed) space. k is clamped to class size - 1;
/// distance ties break toward the lower instance index. Fixed once per
/// optimization, never recomputed under the transform.
TripleSet target_neighbors(const Eigen::MatrixXd& features,
                           const Eigen::VectorXi& labels, int k);

/// Class-balancing weights w_i = N / N_i with N_i the size of instance
/// i's class. Within each class the weights sum to N exactly.
Eigen::VectorXd class_weights(const Eigen::VectorXi& labels);

/// Quadratically smoothed hinge: 0 for z <= 0, z^2/2 on (0, 1),
/// z - 1/2 for z >= 1. Continuously differentiable.
double smooth_hinge(double z);
double smooth_hinge_grad(double z);

/// Full objective: weighted pull term over target pairs, push term over
/// every (target pair, impostor) triple with a unit margin inside the
/// smooth hinge, and the smoothed column-norm penalty
/// lambda * sum_j sqrt(||L_j||^2 + norm_eps).
double loss(const LinearTransform& transform, const Eigen::MatrixXd& features,
            const Eigen::VectorXi& labels, const TripleSet& triples,
            const Eigen::VectorXd& weights, const TrainConfig& config);

/// Analytic gradient of `loss` with respect to the transform.
Eigen::MatrixXd gradient(const LinearTransform& transform,
                         const Eigen::MatrixXd& features,
                         const Eigen::VectorXi& labels, const TripleSet& triples,
                         const Eigen::VectorXd& weights,
                         const TrainConfig& config);

/// Full-batch gradient descent with backtracking step control. The
/// transform starts from the top-d principal directions of the training
/// features. A proposed step is accepted only if the loss does not
/// increase; otherwise the step is halved (up to 30 times). Accepted
/// steps grow the step size by 1.05. Stops on relative loss change
/// below config.tol or after max_epochs.
///
/// The dataset must be standardized; `params` records how, and is
/// carried into the model for test-side use.
TrainedModel train(const Dataset& ds, int affordance, const TrainConfig& config,
                   const StandardizationParams& params);

/// Convenience overload for data standardized out of band: records
/// identity standardization parameters.
TrainedModel train(const Dataset& ds, int affordance, const TrainConfig& config);

} // namespace lmcar

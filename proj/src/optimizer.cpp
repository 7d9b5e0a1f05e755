#include "lmcar/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lmcar/errors.hpp"
#include "lmcar/pca.hpp"

namespace lmcar {

namespace {

// Squared pairwise distances between the columns of Z (one column per
// instance in the transformed space).
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& z) {
    const Eigen::Index n = z.cols();
    Eigen::VectorXd sq = z.colwise().squaredNorm();
    Eigen::MatrixXd d2 = sq.replicate(1, n) + sq.transpose().replicate(n, 1) -
                         2.0 * (z.transpose() * z);
    return d2.cwiseMax(0.0);
}

std::vector<std::vector<int>> impostor_lists(const Eigen::VectorXi& labels) {
    std::vector<int> idx0;
    std::vector<int> idx1;
    for (int i = 0; i < labels.size(); ++i) {
        (labels[i] == 0 ? idx0 : idx1).push_back(i);
    }
    // impostors[c] holds the instances NOT in class c
    return {idx1, idx0};
}

double column_penalty(const Eigen::MatrixXd& m, double norm_eps) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        total += std::sqrt(m.col(j).squaredNorm() + norm_eps);
    }
    return total;
}

} // namespace

void check_config(const TrainConfig& config, int dims) {
    if (config.k < 1) {
        throw ValidationError("k must be at least 1, got " +
                              std::to_string(config.k));
    }
    if (config.c < 0.0) {
        throw ValidationError("push weight c must be non-negative");
    }
    if (config.lambda < 0.0) {
        throw ValidationError("lambda must be non-negative");
    }
    if (config.d < 1 || config.d > dims) {
        throw ValidationError("output dimension d must be in [1, " +
                              std::to_string(dims) + "], got " +
                              std::to_string(config.d));
    }
    if (config.max_epochs < 1) {
        throw ValidationError("max_epochs must be at least 1");
    }
    if (!(config.init_step > 0.0)) {
        throw ValidationError("init_step must be positive");
    }
    if (!(config.tol > 0.0)) {
        throw ValidationError("tol must be positive");
    }
    if (!(config.norm_eps > 0.0)) {
        throw ValidationError("norm_eps must be positive");
    }
}

TripleSet target_neighbors(const Eigen::MatrixXd& features,
                           const Eigen::VectorXi& labels, int k) {
    const int n = static_cast<int>(features.rows());
    if (labels.size() != n) {
        throw ValidationError("labels/features row count mismatch");
    }
    if (k < 1) {
        throw ValidationError("k must be at least 1");
    }
    int counts[2] = {0, 0};
    for (int i = 0; i < n; ++i) {
        counts[labels[i]]++;
    }

    TripleSet out;
    std::vector<std::pair<double, int>> same; // (squared distance, index)
    for (int i = 0; i < n; ++i) {
        const int usable = std::min(k, counts[labels[i]] - 1);
        if (usable <= 0) {
            continue;
        }
        same.clear();
        for (int j = 0; j < n; ++j) {
            if (j == i || labels[j] != labels[i]) {
                continue;
            }
            same.emplace_back((features.row(i) - features.row(j)).squaredNorm(),
                              j);
        }
        // ties resolve toward the lower index because the index is the
        // secondary sort key
        std::partial_sort(same.begin(), same.begin() + usable, same.end());
        for (int m = 0; m < usable; ++m) {
            out.target_pairs.emplace_back(i, same[m].second);
        }
    }
    return out;
}

Eigen::VectorXd class_weights(const Eigen::VectorXi& labels) {
    const int n = static_cast<int>(labels.size());
    int counts[2] = {0, 0};
    for (int i = 0; i < n; ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw ValidationError("labels must be 0 or 1");
        }
        counts[labels[i]]++;
    }
    if (counts[0] == 0 || counts[1] == 0) {
        throw ValidationError("both classes must be present");
    }
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) {
        w[i] = static_cast<double>(n) / counts[labels[i]];
    }
    return w;
}

double smooth_hinge(double z) {
    if (z <= 0.0) {
        return 0.0;
    }
    if (z >= 1.0) {
        return z - 0.5;
    }
    return 0.5 * z * z;
}

double smooth_hinge_grad(double z) {
    if (z <= 0.0) {
        return 0.0;
    }
    if (z >= 1.0) {
        return 1.0;
    }
    return z;
}

double loss(const LinearTransform& transform, const Eigen::MatrixXd& features,
            const Eigen::VectorXi& labels, const TripleSet& triples,
            const Eigen::VectorXd& weights, const TrainConfig& config) {
    const Eigen::MatrixXd z = transform.matrix * features.transpose();
    const Eigen::MatrixXd d2 = squared_distances(z);
    const auto impostors = impostor_lists(labels);

    double pull = 0.0;
    double push = 0.0;
    for (const auto& [i, j] : triples.target_pairs) {
        const double dij = d2(i, j);
        pull += weights[i] * dij;
        const auto& opp = impostors[labels[i]];
        double acc = 0.0;
        for (int l : opp) {
            acc += smooth_hinge(dij - d2(i, l) + 1.0);
        }
        push += weights[i] * acc;
    }
    return pull + config.c * push +
           config.lambda * column_penalty(transform.matrix, config.norm_eps);
}

Eigen::MatrixXd gradient(const LinearTransform& transform,
                         const Eigen::MatrixXd& features,
                         const Eigen::VectorXi& labels, const TripleSet& triples,
                         const Eigen::VectorXd& weights,
                         const TrainConfig& config) {
    const int n = static_cast<int>(features.rows());
    const Eigen::MatrixXd z = transform.matrix * features.transpose();
    const Eigen::MatrixXd d2 = squared_distances(z);
    const auto impostors = impostor_lists(labels);

    // g accumulates pair coefficients: a term coeff * ||L(x_a - x_b)||^2
    // contributes +coeff at (a,a),(b,b) and -coeff at (a,b),(b,a). The
    // data gradient is then 2 * (L X^T) g X.
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    auto add_pair = [&g](int a, int b, double coeff) {
        g(a, a) += coeff;
        g(b, b) += coeff;
        g(a, b) -= coeff;
        g(b, a) -= coeff;
    };

    for (const auto& [i, j] : triples.target_pairs) {
        add_pair(i, j, weights[i]);
        const double dij = d2(i, j);
        const auto& opp = impostors[labels[i]];
        for (int l : opp) {
            const double slope = smooth_hinge_grad(dij - d2(i, l) + 1.0);
            if (slope == 0.0) {
                continue;
            }
            const double coeff = config.c * weights[i] * slope;
            add_pair(i, j, coeff);
            add_pair(i, l, -coeff);
        }
    }

    Eigen::MatrixXd grad = 2.0 * (z * g) * features;
    for (Eigen::Index col = 0; col < grad.cols(); ++col) {
        const double norm = std::sqrt(transform.matrix.col(col).squaredNorm() +
                                      config.norm_eps);
        grad.col(col) += (config.lambda / norm) * transform.matrix.col(col);
    }
    return grad;
}

TrainedModel train(const Dataset& ds, int affordance, const TrainConfig& config,
                   const StandardizationParams& params) {
    if (affordance < 0 || affordance >= ds.affordance_count()) {
        throw ValidationError("affordance index out of range");
    }
    check_config(config, ds.dim());
    const Eigen::VectorXi labels = ds.labels.col(affordance);
    const Eigen::VectorXd weights = class_weights(labels);
    const TripleSet triples = target_neighbors(ds.features, labels, config.k);
    if (triples.target_pairs.empty()) {
        throw ValidationError("no target-neighbor pairs; classes too small");
    }

    TrainedModel model;
    model.transform.matrix = pca_basis(ds.features, config.d);
    model.train_features = ds.features;
    model.train_labels = labels;
    model.config = config;
    model.standardization = params;

    double cur = loss(model.transform, ds.features, labels, triples, weights,
                      config);
    model.loss_trace.push_back(cur);

    double step = config.init_step;
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        const Eigen::MatrixXd grad = gradient(model.transform, ds.features,
                                              labels, triples, weights, config);
        bool accepted = false;
        double next = cur;
        LinearTransform candidate;
        for (int halving = 0; halving <= 30; ++halving) {
            candidate.matrix = model.transform.matrix - step * grad;
            next = loss(candidate, ds.features, labels, triples, weights,
                        config);
            if (next <= cur) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            model.step_underflow = true;
            break;
        }
        model.transform = candidate;
        model.loss_trace.push_back(next);
        step *= 1.05;
        const double rel = std::abs(cur - next) / std::max(cur, 1e-300);
        cur = next;
        if (rel < config.tol) {
            break;
        }
    }
    return model;
}

TrainedModel train(const Dataset& ds, int affordance,
                   const TrainConfig& config) {
    StandardizationParams identity;
    identity.mean = Eigen::VectorXd::Zero(ds.dim());
    identity.std = Eigen::VectorXd::Ones(ds.dim());
    return train(ds, affordance, config, identity);
}

} // namespace lmcar

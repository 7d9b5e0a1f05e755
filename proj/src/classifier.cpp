#include "lmcar/classifier.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "lmcar/analysis.hpp"
#include "lmcar/errors.hpp"
#include "lmcar/pca.hpp"

namespace lmcar {

int knn_predict(const TrainedModel& model, const Eigen::VectorXd& query) {
    const int n = static_cast<int>(model.train_features.rows());
    if (query.size() != model.transform.matrix.cols()) {
        throw ValidationError("query has " + std::to_string(query.size()) +
                              " dimensions, transform expects " +
                              std::to_string(model.transform.matrix.cols()));
    }
    if (n == 0) {
        throw ValidationError("model holds no training points");
    }
    const Eigen::VectorXd zq = model.transform.matrix * query;
    std::vector<std::pair<double, int>> order(n);
    for (int i = 0; i < n; ++i) {
        const double d2 =
            (model.transform.matrix * model.train_features.row(i).transpose() -
             zq)
                .squaredNorm();
        order[i] = {d2, i};
    }
    const int k = std::min(model.config.k, n);
    // secondary key is the index, so equal distances prefer lower indices
    std::partial_sort(order.begin(), order.begin() + k, order.end());

    int votes = 0;
    for (int m = 0; m < k; ++m) {
        votes += model.train_labels[order[m].second];
    }
    if (2 * votes == k) {
        return model.train_labels[order[0].second];
    }
    return 2 * votes > k ? 1 : 0;
}

EvalReport evaluate(const TrainedModel& model,
                    const Eigen::MatrixXd& raw_features,
                    const Eigen::VectorXi& labels, double kept_rel_threshold) {
    if (raw_features.rows() == 0) {
        throw ValidationError("empty test set");
    }
    if (labels.size() != raw_features.rows()) {
        throw ValidationError("test labels/features row count mismatch");
    }
    EvalReport report;
    for (Eigen::Index i = 0; i < raw_features.rows(); ++i) {
        const Eigen::VectorXd q = apply_standardization(
            raw_features.row(i).transpose(), model.standardization);
        const int pred = knn_predict(model, q);
        const int truth = labels[i];
        if (pred == 1 && truth == 1) report.tp++;
        if (pred == 1 && truth == 0) report.fp++;
        if (pred == 0 && truth == 0) report.tn++;
        if (pred == 0 && truth == 1) report.fn++;
    }
    const int denom = 2 * report.tp + report.fp + report.fn;
    report.f1 = denom == 0 ? 0.0 : 2.0 * report.tp / denom;
    report.accuracy = static_cast<double>(report.tp + report.tn) /
                      static_cast<double>(raw_features.rows());
    if (model.transform.matrix.isZero(0.0)) {
        report.kept_fraction = 0.0;
    } else {
        report.kept_fraction = kept_fraction(
            magnitude_profile(model.transform.matrix), kept_rel_threshold);
    }
    return report;
}

Eigen::MatrixXd pca_project(const Eigen::MatrixXd& features, int d) {
    return pca_basis(features, d);
}

TrainedModel make_pca_baseline(const Dataset& train_std, int affordance,
                               int pca_dim, int k,
                               const StandardizationParams& params) {
    if (affordance < 0 || affordance >= train_std.affordance_count()) {
        throw ValidationError("affordance index out of range");
    }
    TrainedModel model;
    model.transform.matrix = pca_basis(train_std.features, pca_dim);
    model.train_features = train_std.features;
    model.train_labels = train_std.labels.col(affordance);
    model.config.k = k;
    model.config.d = static_cast<int>(model.transform.matrix.rows());
    model.config.c = 0.0;
    model.config.lambda = 0.0;
    model.standardization = params;
    return model;
}

namespace {

struct FoldData {
    Dataset train_std;
    Eigen::MatrixXd val_features; // raw
    Eigen::VectorXi val_labels;
    StandardizationParams params;
};

std::vector<FoldData> prepare_folds(
    const Dataset& train_set, int affordance, int folds, std::uint64_t seed,
    const std::optional<StandardizationParams>& fixed) {
    std::vector<FoldData> out;
    for (const auto& fold : kfold(train_set, affordance, folds, seed)) {
        FoldData fd;
        const Dataset ftrain = subset(train_set, fold.train);
        const Dataset fval = subset(train_set, fold.validation);
        if (fixed) {
            fd.params = *fixed;
            fd.train_std = apply_standardization(ftrain, fd.params);
        } else {
            std::tie(fd.train_std, fd.params) = standardize(ftrain);
        }
        fd.val_features = fval.features;
        fd.val_labels = fval.labels.col(affordance);
        out.push_back(std::move(fd));
    }
    return out;
}

} // namespace

TrainConfig cross_validate(const Dataset& train_set, int affordance,
                           const std::vector<TrainConfig>& grid, int folds,
                           std::uint64_t seed,
                           const std::optional<StandardizationParams>& fixed) {
    if (grid.empty()) {
        throw ValidationError("empty parameter grid");
    }
    const auto fold_data =
        prepare_folds(train_set, affordance, folds, seed, fixed);

    TrainConfig best = grid.front();
    double best_f1 = -1.0;
    for (const auto& cfg : grid) {
        double sum = 0.0;
        for (const auto& fd : fold_data) {
            const TrainedModel model =
                train(fd.train_std, affordance, cfg, fd.params);
            sum += evaluate(model, fd.val_features, fd.val_labels).f1;
        }
        const double mean_f1 = sum / static_cast<double>(fold_data.size());
        const bool better =
            mean_f1 > best_f1 ||
            (mean_f1 == best_f1 &&
             (cfg.lambda > best.lambda ||
              (cfg.lambda == best.lambda && cfg.c > best.c)));
        if (better) {
            best = cfg;
            best_f1 = mean_f1;
        }
    }
    return best;
}

int cross_validate_pca_dim(const Dataset& train_set, int affordance,
                           const std::vector<int>& dims, int k, int folds,
                           std::uint64_t seed,
                           const std::optional<StandardizationParams>& fixed) {
    if (dims.empty()) {
        throw ValidationError("empty dimension grid");
    }
    const auto fold_data =
        prepare_folds(train_set, affordance, folds, seed, fixed);

    int best = dims.front();
    double best_f1 = -1.0;
    for (int d : dims) {
        double sum = 0.0;
        for (const auto& fd : fold_data) {
            const TrainedModel model =
                make_pca_baseline(fd.train_std, affordance, d, k, fd.params);
            sum += evaluate(model, fd.val_features, fd.val_labels).f1;
        }
        const double mean_f1 = sum / static_cast<double>(fold_data.size());
        if (mean_f1 > best_f1) {
            best = d;
            best_f1 = mean_f1;
        }
    }
    return best;
}

} // namespace lmcar

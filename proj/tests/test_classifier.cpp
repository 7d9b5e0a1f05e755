#include <cmath>
#include <vector>

#include "doctest.h"
#include "lmcar/classifier.hpp"
#include "lmcar/dataset.hpp"
#include "lmcar/errors.hpp"
#include "lmcar/rng.hpp"
#include "test_util.hpp"

using namespace lmcar;
using testutil::random_orthogonal;
using testutil::toy_dataset;

namespace {

TrainedModel manual_model(const Eigen::MatrixXd& train_features,
                          const Eigen::VectorXi& labels,
                          const Eigen::MatrixXd& transform, int k) {
    TrainedModel model;
    model.transform.matrix = transform;
    model.train_features = train_features;
    model.train_labels = labels;
    model.config.k = k;
    model.config.d = static_cast<int>(transform.rows());
    model.standardization.mean = Eigen::VectorXd::Zero(train_features.cols());
    model.standardization.std = Eigen::VectorXd::Ones(train_features.cols());
    return model;
}

Eigen::VectorXd point1(double x) {
    Eigen::VectorXd v(1);
    v << x;
    return v;
}

} // namespace

TEST_CASE("a query on a training point takes that label with k=1") {
    Eigen::MatrixXd x(3, 1);
    x << 0.0, 5.0, 10.0;
    Eigen::VectorXi y(3);
    y << 0, 1, 0;
    const TrainedModel model =
        manual_model(x, y, Eigen::MatrixXd::Identity(1, 1), 1);
    CHECK(knn_predict(model, point1(5.0)) == 1);
    CHECK(knn_predict(model, point1(0.0)) == 0);
}

TEST_CASE("majority vote with k=3") {
    Eigen::MatrixXd x(4, 1);
    x << 0.0, 1.0, 2.0, 50.0;
    Eigen::VectorXi y(4);
    y << 1, 1, 0, 0;
    const TrainedModel model =
        manual_model(x, y, Eigen::MatrixXd::Identity(1, 1), 3);
    // neighbors of 0.5: {0.0, 1.0, 2.0} = two positives, one negative
    CHECK(knn_predict(model, point1(0.5)) == 1);
}

TEST_CASE("even-k vote ties resolve to the nearest neighbor's label") {
    Eigen::MatrixXd x(2, 1);
    x << 0.9, 1.1;
    Eigen::VectorXi y(2);
    y << 1, 0;
    const TrainedModel model =
        manual_model(x, y, Eigen::MatrixXd::Identity(1, 1), 2);
    CHECK(knn_predict(model, point1(0.95)) == 1);
    CHECK(knn_predict(model, point1(1.05)) == 0);
}

TEST_CASE("distance ties resolve to the lower training index") {
    Eigen::MatrixXd x(2, 1);
    x << -1.0, 1.0; // both at distance 1 from the origin
    Eigen::VectorXi y(2);
    y << 1, 0;
    const TrainedModel model =
        manual_model(x, y, Eigen::MatrixXd::Identity(1, 1), 1);
    CHECK(knn_predict(model, point1(0.0)) == 1);
}

TEST_CASE("predictions ignore orthogonal rotations of the transform") {
    const Dataset ds = toy_dataset(8, 8, 5, 61);
    Rng rng(62);
    Eigen::MatrixXd l(3, 5);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 5; ++c) {
            l(r, c) = rng.next_normal();
        }
    }
    const TrainedModel base = manual_model(ds.features, ds.labels.col(0), l, 3);

    std::vector<Eigen::VectorXd> queries;
    for (int q = 0; q < 20; ++q) {
        Eigen::VectorXd v(5);
        for (int c = 0; c < 5; ++c) {
            v[c] = rng.next_normal();
        }
        queries.push_back(v);
    }
    for (std::uint64_t qseed = 1; qseed <= 5; ++qseed) {
        TrainedModel rotated = base;
        rotated.transform.matrix = random_orthogonal(3, qseed) * l;
        for (const auto& q : queries) {
            CHECK(knn_predict(base, q) == knn_predict(rotated, q));
        }
    }
}

TEST_CASE("knn_predict rejects a dimension mismatch") {
    const TrainedModel model = manual_model(Eigen::MatrixXd::Zero(2, 3),
                                            Eigen::VectorXi::Zero(2),
                                            Eigen::MatrixXd::Identity(3, 3), 1);
    CHECK_THROWS_AS(knn_predict(model, point1(0.0)), ValidationError);
}

TEST_CASE("evaluate on perfect predictions") {
    Eigen::MatrixXd x(4, 1);
    x << 0.0, 1.0, 10.0, 11.0;
    Eigen::VectorXi y(4);
    y << 0, 0, 1, 1;
    const TrainedModel model =
        manual_model(x, y, Eigen::MatrixXd::Identity(1, 1), 1);
    const EvalReport report = evaluate(model, x, y);
    CHECK(report.f1 == 1.0);
    CHECK(report.accuracy == 1.0);
    CHECK(report.tp == 2);
    CHECK(report.tn == 2);
    CHECK(report.fp + report.fn == 0);
    CHECK(report.kept_fraction == 1.0);
}

TEST_CASE("all-negative predictions on a set with positives give f1 = 0") {
    Eigen::MatrixXd train(2, 1);
    train << 0.0, 1.0;
    Eigen::VectorXi train_y = Eigen::VectorXi::Zero(2);
    train_y[1] = 1;
    TrainedModel model =
        manual_model(train, train_y, Eigen::MatrixXd::Identity(1, 1), 1);
    // park the positive training point far away so nothing reaches it
    model.train_features(1, 0) = 1e6;

    Eigen::MatrixXd test(3, 1);
    test << 0.1, 0.2, 0.3;
    Eigen::VectorXi test_y(3);
    test_y << 1, 1, 0;
    const EvalReport report = evaluate(model, test, test_y);
    CHECK(report.tp == 0);
    CHECK(report.f1 == 0.0);
    CHECK(report.fn == 2);
}

TEST_CASE("confusion counts reproduce the reported scores") {
    Eigen::MatrixXd train(2, 1);
    train << 0.0, 10.0;
    Eigen::VectorXi train_y(2);
    train_y << 0, 1;
    const TrainedModel model =
        manual_model(train, train_y, Eigen::MatrixXd::Identity(1, 1), 1);

    // one true positive, one false positive, one false negative (pred 0
    // at x=1 despite label 1), seven true negatives
    Eigen::MatrixXd test(10, 1);
    test << 9.0, 8.0, 1.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7;
    Eigen::VectorXi test_y(10);
    test_y << 1, 0, 1, 0, 0, 0, 0, 0, 0, 0;
    const EvalReport report = evaluate(model, test, test_y);
    CHECK(report.tp == 1);
    CHECK(report.fp == 1);
    CHECK(report.fn == 1);
    CHECK(report.tn == 7);
    CHECK(report.f1 == 0.5);
    CHECK(report.accuracy == 0.8);
    CHECK(report.tp + report.fp + report.tn + report.fn == 10);

    // recomputing from the counts matches the scalars
    CHECK(report.f1 ==
          2.0 * report.tp / (2.0 * report.tp + report.fp + report.fn));
    CHECK(report.accuracy == (report.tp + report.tn) / 10.0);
}

TEST_CASE("evaluate rejects an empty test set") {
    const TrainedModel model = manual_model(Eigen::MatrixXd::Zero(2, 1),
                                            Eigen::VectorXi::Zero(2),
                                            Eigen::MatrixXd::Identity(1, 1), 1);
    CHECK_THROWS_AS(evaluate(model, Eigen::MatrixXd(0, 1), Eigen::VectorXi(0)),
                    ValidationError);
}

TEST_CASE("pca recovers a one-dimensional subspace") {
    Rng rng(71);
    Eigen::Vector3d dir(1.0, 2.0, -1.0);
    dir.normalize();
    Eigen::MatrixXd x(40, 3);
    for (int i = 0; i < 40; ++i) {
        x.row(i) = (5.0 + 2.0 * rng.next_normal()) * dir.transpose();
    }
    const Eigen::MatrixXd basis = pca_project(x, 1);
    REQUIRE(basis.rows() == 1);

    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;
    const Eigen::MatrixXd reconstructed =
        (centered * basis.transpose()) * basis;
    CHECK((reconstructed - centered).norm() < 1e-10);
}

TEST_CASE("pca with d = 0 is the identity") {
    const Dataset ds = toy_dataset(4, 4, 3, 73);
    CHECK(pca_project(ds.features, 0) == Eigen::MatrixXd::Identity(3, 3));
}

TEST_CASE("projected covariance is diagonal with non-increasing entries") {
    const Dataset ds = toy_dataset(30, 30, 6, 79);
    const Eigen::MatrixXd basis = pca_project(ds.features, 3);
    const Eigen::RowVectorXd mean = ds.features.colwise().mean();
    const Eigen::MatrixXd centered = ds.features.rowwise() - mean;
    const Eigen::MatrixXd projected = centered * basis.transpose();
    const Eigen::MatrixXd cov =
        projected.transpose() * projected / ds.n();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            if (r != c) {
                CHECK(std::abs(cov(r, c)) < 1e-10);
            }
        }
    }
    CHECK(cov(0, 0) >= cov(1, 1));
    CHECK(cov(1, 1) >= cov(2, 2));
}

TEST_CASE("pca rejects d above the dimension count") {
    const Dataset ds = toy_dataset(4, 4, 3, 73);
    CHECK_THROWS_AS(pca_project(ds.features, 4), ValidationError);
}

TEST_CASE("full-dimensional pca baseline predicts like plain knn") {
    SyntheticSpec spec;
    spec.n_per_class = {12, 12};
    spec.dims = 5;
    spec.informative_dims = {0, 2};
    spec.class_separation = 2.0;
    spec.seed = 83;
    auto [raw, truth] = make_synthetic(spec);
    const auto [train_std, params] = standardize(raw);

    const TrainedModel full = make_pca_baseline(train_std, 0, 5, 3, params);
    const TrainedModel plain = make_pca_baseline(train_std, 0, 0, 3, params);
    Rng rng(84);
    for (int q = 0; q < 25; ++q) {
        Eigen::VectorXd v(5);
        for (int c = 0; c < 5; ++c) {
            v[c] = rng.next_normal();
        }
        CHECK(knn_predict(full, v) == knn_predict(plain, v));
    }
}

TEST_CASE("cross-validation on a single-point grid returns it") {
    SyntheticSpec spec;
    spec.n_per_class = {8, 8};
    spec.dims = 4;
    spec.informative_dims = {0};
    spec.class_separation = 4.0;
    spec.seed = 89;
    auto [train_set, truth] = make_synthetic(spec);

    TrainConfig only;
    only.c = 2.5;
    only.lambda = 0.05;
    only.d = 2;
    only.max_epochs = 40;
    const TrainConfig best = cross_validate(train_set, 0, {only}, 2, 91);
    CHECK(best.c == 2.5);
    CHECK(best.lambda == 0.05);
}

TEST_CASE("cross-validation ties prefer sparser, then stronger push") {
    SyntheticSpec spec;
    spec.n_per_class = {10, 10};
    spec.dims = 4;
    spec.informative_dims = {0, 1};
    spec.class_separation = 8.0; // separable enough that F1 saturates
    spec.seed = 97;
    auto [train_set, truth] = make_synthetic(spec);

    TrainConfig base;
    base.d = 2;
    base.max_epochs = 60;

    SUBCASE("larger lambda wins") {
        TrainConfig low = base;
        low.c = 1.0;
        low.lambda = 0.01;
        TrainConfig high = base;
        high.c = 1.0;
        high.lambda = 0.1;
        const TrainConfig best =
            cross_validate(train_set, 0, {low, high}, 2, 101);
        CHECK(best.lambda == 0.1);
    }
    SUBCASE("equal lambda, larger c wins") {
        TrainConfig weak = base;
        weak.c = 0.5;
        weak.lambda = 0.01;
        TrainConfig strong = base;
        strong.c = 1.0;
        strong.lambda = 0.01;
        const TrainConfig best =
            cross_validate(train_set, 0, {weak, strong}, 2, 101);
        CHECK(best.c == 1.0);
    }
}

TEST_CASE("cross-validated choice stays near the best grid point") {
    SyntheticSpec spec;
    spec.n_per_class = {30, 30};
    spec.dims = 8;
    spec.informative_dims = {1, 4};
    spec.class_separation = 3.0;
    spec.seed = 103;
    auto [full, truth] = make_synthetic(spec);
    auto [train_set, test_set] = split(full, 0, 0.7, 105);

    std::vector<TrainConfig> grid;
    for (double lambda : {0.0, 0.1, 1.0}) {
        TrainConfig cfg;
        cfg.c = 1.0;
        cfg.lambda = lambda;
        cfg.d = 2;
        cfg.max_epochs = 60;
        grid.push_back(cfg);
    }

    auto test_f1 = [&](const TrainConfig& cfg) {
        auto [train_std, params] = standardize(train_set);
        const TrainedModel model = train(train_std, 0, cfg, params);
        return evaluate(model, test_set.features, test_set.labels.col(0)).f1;
    };

    // exhaustive oracle over the grid
    double best_test = 0.0;
    for (const auto& cfg : grid) {
        best_test = std::max(best_test, test_f1(cfg));
    }
    const TrainConfig chosen = cross_validate(train_set, 0, grid, 3, 107);
    CHECK(test_f1(chosen) >= best_test - 0.05);
}

TEST_CASE("pca dimension selection by cross-validation") {
    SyntheticSpec spec;
    spec.n_per_class = {12, 12};
    spec.dims = 6;
    spec.informative_dims = {0, 3};
    spec.class_separation = 4.0;
    spec.seed = 109;
    auto [train_set, truth] = make_synthetic(spec);
    const int best = cross_validate_pca_dim(train_set, 0, {0, 2, 4}, 3, 2, 111);
    CHECK((best == 0 || best == 2 || best == 4));

    CHECK_THROWS_AS(cross_validate_pca_dim(train_set, 0, {}, 3, 2, 111),
                    ValidationError);
}

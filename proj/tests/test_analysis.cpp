#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "lmcar/analysis.hpp"
#include "lmcar/errors.hpp"
#include "lmcar/rng.hpp"
#include "test_util.hpp"

using namespace lmcar;
using testutil::random_orthogonal;

namespace {

/// Numeric oracle for the 1-D Gaussian KL: Simpson quadrature of
/// integral p(x) ln(p(x)/q(x)) dx.
double kl_quadrature_1d(double mean_p, double var_p, double mean_q,
                        double var_q) {
    const double sd = std::sqrt(var_p);
    const double lo = mean_p - 12.0 * sd;
    const double hi = mean_p + 12.0 * sd;
    const int segments = 20000; // even
    const double h = (hi - lo) / segments;
    auto log_pdf = [](double x, double mu, double var) {
        return -0.5 * std::log(2.0 * M_PI * var) -
               (x - mu) * (x - mu) / (2.0 * var);
    };
    auto f = [&](double x) {
        const double lp = log_pdf(x, mean_p, var_p);
        return std::exp(lp) * (lp - log_pdf(x, mean_q, var_q));
    };
    double acc = f(lo) + f(hi);
    for (int i = 1; i < segments; ++i) {
        acc += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return acc * h / 3.0;
}

GaussianMagnitudeModel gaussian1(double mean, double variance) {
    GaussianMagnitudeModel g;
    g.mean = Eigen::VectorXd::Constant(1, mean);
    g.variance = Eigen::VectorXd::Constant(1, variance);
    return g;
}

MagnitudeProfile raw_profile(const std::vector<double>& normalized) {
    MagnitudeProfile p;
    p.column_norms =
        Eigen::Map<const Eigen::VectorXd>(normalized.data(),
                                          static_cast<Eigen::Index>(
                                              normalized.size()));
    p.normalized = p.column_norms;
    return p;
}

} // namespace

TEST_CASE("magnitude profile of the identity") {
    const MagnitudeProfile p =
        magnitude_profile(Eigen::MatrixXd::Identity(2, 2));
    CHECK(p.column_norms[0] == 1.0);
    CHECK(p.column_norms[1] == 1.0);
    CHECK(p.normalized[0] == 0.5);
    CHECK(p.normalized[1] == 0.5);
}

TEST_CASE("zero columns stay zero in the profile") {
    Eigen::MatrixXd l(2, 3);
    l << 1.0, 0.0, 2.0,
         2.0, 0.0, 1.0;
    const MagnitudeProfile p = magnitude_profile(l);
    CHECK(p.column_norms[1] == 0.0);
    CHECK(p.normalized[1] == 0.0);
    CHECK(p.normalized.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("profile rejects an all-zero transform") {
    CHECK_THROWS_AS(magnitude_profile(Eigen::MatrixXd::Zero(2, 3)),
                    ValidationError);
}

TEST_CASE("profile and scale invariances") {
    Rng rng(131);
    Eigen::MatrixXd l(3, 6);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 6; ++c) {
            l(r, c) = rng.next_normal();
        }
    }
    const MagnitudeProfile base = magnitude_profile(l);

    for (std::uint64_t qseed = 1; qseed <= 5; ++qseed) {
        const MagnitudeProfile rotated =
            magnitude_profile(random_orthogonal(3, qseed) * l);
        CHECK((rotated.column_norms - base.column_norms).cwiseAbs().maxCoeff() <
              1e-12);
    }

    const MagnitudeProfile scaled = magnitude_profile(3.5 * l);
    CHECK((scaled.normalized - base.normalized).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("kept fraction counts surviving columns") {
    SUBCASE("all equal columns survive") {
        const MagnitudeProfile p =
            magnitude_profile(Eigen::MatrixXd::Identity(3, 3));
        CHECK(kept_fraction(p, 1e-3) == 1.0);
    }
    SUBCASE("single dominant column") {
        Eigen::MatrixXd l = Eigen::MatrixXd::Zero(2, 4);
        l(0, 1) = 2.0;
        CHECK(kept_fraction(magnitude_profile(l), 1e-3) == 0.25);
    }
    SUBCASE("mid-range threshold") {
        // norms (1.0, 0.002, 0.5) at threshold 1e-2: cutoff 0.01, two
        // columns survive
        const MagnitudeProfile p = raw_profile({1.0, 0.002, 0.5});
        CHECK(kept_fraction(p, 1e-2) == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("threshold domain") {
        const MagnitudeProfile p = raw_profile({1.0});
        CHECK_THROWS_AS(kept_fraction(p, 0.0), ValidationError);
        CHECK_THROWS_AS(kept_fraction(p, 1.0), ValidationError);
    }
}

TEST_CASE("group summary masses and divergences") {
    const std::vector<FeatureGroupSpec> groups = {{"head", 0, 4, false},
                                                  {"tail", 4, 2, false}};
    SUBCASE("uniform within-group weights have zero divergence") {
        const MagnitudeProfile p =
            raw_profile({0.2, 0.2, 0.2, 0.2, 0.1, 0.1});
        const GroupSummary s = group_summary(p, groups);
        REQUIRE(s.stats.size() == 2);
        CHECK(s.stats[0].mass == doctest::Approx(0.8));
        CHECK(s.stats[1].mass == doctest::Approx(0.2));
        CHECK(s.stats[0].kl_vs_uniform == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(s.stats[1].kl_vs_uniform == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(s.stats[0].mass + s.stats[1].mass ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("all mass on one of four bins gives ln 4") {
        const MagnitudeProfile p = raw_profile({0.5, 0.0, 0.0, 0.0, 0.25,
                                                0.25});
        const GroupSummary s = group_summary(p, groups);
        CHECK(s.stats[0].kl_vs_uniform ==
              doctest::Approx(std::log(4.0)).epsilon(1e-12));
        CHECK_FALSE(s.stats[0].zero_mass);
    }
    SUBCASE("zero-mass group is flagged with zero divergence") {
        const MagnitudeProfile p = raw_profile({0.4, 0.3, 0.2, 0.1, 0.0,
                                                0.0});
        const GroupSummary s = group_summary(p, groups);
        CHECK(s.stats[1].zero_mass);
        CHECK(s.stats[1].kl_vs_uniform == 0.0);
    }
}

TEST_CASE("within-group divergence stays inside its closed-form range") {
    Rng rng(137);
    const std::vector<FeatureGroupSpec> groups = {{"a", 0, 5, false},
                                                  {"b", 5, 3, false}};
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd mags(8);
        for (int j = 0; j < 8; ++j) {
            mags[j] = std::abs(rng.next_normal());
        }
        const GroupSummary s =
            group_summary(profile_from_magnitudes(mags), groups);
        CHECK(s.stats[0].kl_vs_uniform >= 0.0);
        CHECK(s.stats[0].kl_vs_uniform <= std::log(5.0) + 1e-12);
        CHECK(s.stats[1].kl_vs_uniform >= 0.0);
        CHECK(s.stats[1].kl_vs_uniform <= std::log(3.0) + 1e-12);
    }
}

TEST_CASE("gaussian fit over profiles") {
    SUBCASE("identical profiles floor the variance") {
        const MagnitudeProfile p = raw_profile({0.25, 0.75});
        const GaussianMagnitudeModel g = fit_gaussian({p, p, p});
        CHECK(g.mean[0] == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(g.variance[0] == 1e-12);
        CHECK(g.variance[1] == 1e-12);
    }
    SUBCASE("population variance over two runs") {
        // one-dimensional magnitude values 0.4 and 0.6
        const GaussianMagnitudeModel g =
            fit_gaussian({raw_profile({0.4}), raw_profile({0.6})});
        CHECK(g.mean[0] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(g.variance[0] == doctest::Approx(0.01).epsilon(1e-12));
    }
    SUBCASE("mean of simplex points stays on the simplex") {
        Rng rng(139);
        std::vector<MagnitudeProfile> profiles;
        for (int r = 0; r < 6; ++r) {
            Eigen::VectorXd mags(4);
            for (int j = 0; j < 4; ++j) {
                mags[j] = std::abs(rng.next_normal()) + 0.01;
            }
            profiles.push_back(profile_from_magnitudes(mags));
        }
        const GaussianMagnitudeModel g = fit_gaussian(profiles);
        CHECK(g.mean.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("a single profile is rejected") {
        CHECK_THROWS_AS(fit_gaussian({raw_profile({1.0})}), ValidationError);
    }
}

TEST_CASE("diagonal-Gaussian divergence closed form") {
    SUBCASE("identical distributions") {
        const GaussianMagnitudeModel g = gaussian1(0.3, 0.5);
        CHECK(kl_gaussian(g, g) == 0.0);
    }
    SUBCASE("unit-variance mean shift") {
        // oracle first: quadrature of the defining integral
        const double oracle = kl_quadrature_1d(0.0, 1.0, 1.0, 1.0);
        CHECK(oracle == doctest::Approx(0.5).epsilon(1e-8));
        CHECK(kl_gaussian(gaussian1(0.0, 1.0), gaussian1(1.0, 1.0)) ==
              doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("variance mismatch is asymmetric") {
        const double fwd = kl_gaussian(gaussian1(0.0, 1.0),
                                       gaussian1(0.0, 2.0));
        const double rev = kl_gaussian(gaussian1(0.0, 2.0),
                                       gaussian1(0.0, 1.0));
        // quadrature oracle: (ln 2 - 1/2) / 2 and (1 - ln 2) / 2
        CHECK(fwd == doctest::Approx(kl_quadrature_1d(0.0, 1.0, 0.0, 2.0))
                         .epsilon(1e-6));
        CHECK(rev == doctest::Approx(kl_quadrature_1d(0.0, 2.0, 0.0, 1.0))
                         .epsilon(1e-6));
        CHECK(fwd == doctest::Approx(0.09657359027997265).epsilon(1e-12));
        CHECK(rev == doctest::Approx(0.15342640972002735).epsilon(1e-12));
        CHECK(fwd != rev);
    }
    SUBCASE("non-negative over random floored inputs") {
        Rng rng(149);
        for (int trial = 0; trial < 100; ++trial) {
            const GaussianMagnitudeModel p =
                gaussian1(rng.next_normal(),
                          std::abs(rng.next_normal()) + 1e-12);
            const GaussianMagnitudeModel q =
                gaussian1(rng.next_normal(),
                          std::abs(rng.next_normal()) + 1e-12);
            CHECK(kl_gaussian(p, q) >= 0.0);
        }
    }
}

TEST_CASE("association table") {
    const GaussianMagnitudeModel a = gaussian1(0.0, 1.0);
    const GaussianMagnitudeModel b = gaussian1(0.1, 1.0);
    const GaussianMagnitudeModel c = gaussian1(5.0, 2.0);

    SUBCASE("two affordances point at each other") {
        const AssociationTable t = associate({{"pour", a}, {"stack", b}});
        REQUIRE(t.names == std::vector<std::string>{"pour", "stack"});
        CHECK(t.kl(0, 0) == 0.0);
        CHECK(t.kl(1, 1) == 0.0);
        CHECK(t.top3[0] == std::vector<std::string>{"stack"});
        CHECK(t.top3[1] == std::vector<std::string>{"pour"});
    }
    SUBCASE("identical models are mutual nearest neighbors at zero") {
        const AssociationTable t =
            associate({{"x", a}, {"y", a}, {"z", c}});
        CHECK(t.kl(0, 1) == 0.0);
        CHECK(t.kl(1, 0) == 0.0);
        CHECK(t.top3[0][0] == "y");
        CHECK(t.top3[1][0] == "x");
        CHECK(t.kl(0, 2) > 0.0);
    }
    SUBCASE("row order is canonical regardless of insertion order") {
        std::map<std::string, GaussianMagnitudeModel> unordered;
        unordered["zeta"] = a;
        unordered["alpha"] = b;
        unordered["mid"] = c;
        const AssociationTable t = associate(unordered);
        CHECK(t.names == std::vector<std::string>{"alpha", "mid", "zeta"});
    }
    SUBCASE("single affordance is rejected") {
        CHECK_THROWS_AS(associate({{"only", a}}), ValidationError);
    }
}

TEST_CASE("mean profile averages normalized vectors") {
    const MagnitudeProfile m =
        mean_profile({raw_profile({0.2, 0.8}), raw_profile({0.4, 0.6})});
    CHECK(m.normalized[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(m.normalized[1] == doctest::Approx(0.7).epsilon(1e-12));
}

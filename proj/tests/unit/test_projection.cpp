#include "kpgot/projection.hpp"

#include "instances.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace kpgot;

TEST(Barycentric, DiagonalPlanIsIdentityMap) {
    std::mt19937_64 rng(61);
    const Matrix pts = oracle::random_points(rng, 5, 3);
    const auto q = make_uniform_distribution(pts);
    const auto img = barycentric_map(Matrix(q.weights().asDiagonal()), q);
    EXPECT_LE((img.points - pts).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Barycentric, Midpoint) {
    Matrix y(2, 2);
    y << 0, 0, 2, 0;
    const auto q = make_uniform_distribution(y);
    Matrix plan(1, 2);
    plan << 0.5, 0.5;
    const auto img = barycentric_map(plan, q);
    EXPECT_DOUBLE_EQ(img.points(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(img.points(0, 1), 0.0);
}

TEST(Barycentric, MatchesNaiveLoopAndHull) {
    std::mt19937_64 rng(62);
    const Matrix y = oracle::random_points(rng, 7, 2);
    const auto q = make_uniform_distribution(y);
    const Matrix plan = testing_support::random_cost(rng, 4, 7);
    const auto img = barycentric_map(plan, q);
    for (Index i = 0; i < 4; ++i) {
        double mass = 0.0;
        double acc[2] = {0.0, 0.0};
        for (Index j = 0; j < 7; ++j) {
            mass += plan(i, j);
            acc[0] += plan(i, j) * y(j, 0);
            acc[1] += plan(i, j) * y(j, 1);
        }
        EXPECT_NEAR(img.points(i, 0), acc[0] / mass, 1e-12);
        EXPECT_NEAR(img.points(i, 1), acc[1] / mass, 1e-12);
        EXPECT_GE(img.points(i, 0), y.col(0).minCoeff());
        EXPECT_LE(img.points(i, 0), y.col(0).maxCoeff());
    }
}

TEST(Barycentric, PermutationInvariant) {
    std::mt19937_64 rng(63);
    const Matrix y = oracle::random_points(rng, 6, 2);
    const Matrix plan = testing_support::random_cost(rng, 3, 6);
    std::vector<Index> perm{3, 0, 5, 1, 4, 2};
    Matrix yp(6, 2), pp(3, 6);
    for (Index j = 0; j < 6; ++j) {
        yp.row(j) = y.row(perm[static_cast<std::size_t>(j)]);
        pp.col(j) = plan.col(perm[static_cast<std::size_t>(j)]);
    }
    const auto a = barycentric_map(plan, make_uniform_distribution(y));
    const auto b = barycentric_map(pp, make_uniform_distribution(yp));
    EXPECT_LE((a.points - b.points).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Barycentric, ZeroRowsAreFlagged) {
    const auto q = make_uniform_distribution(Matrix::Identity(2, 2));
    Matrix plan(2, 2);
    plan << 0.5, 0.0, 0.0, 0.0;
    const auto img = barycentric_map(plan, q);
    EXPECT_TRUE(img.valid[0]);
    EXPECT_FALSE(img.valid[1]);
    EXPECT_TRUE(std::isnan(img.points(1, 0)));
    EXPECT_ANY_THROW(barycentric_map(Matrix::Zero(2, 3), q));
}

TEST(Outliers, Selection) {
    Matrix plan(2, 5);
    plan << 0.1, 0.0, 0.2, 0.05, 0.05, 0.1, 0.0, 0.1, 0.05, 0.05;
    EXPECT_TRUE(received_mass_outliers(plan, 0.0, {}).empty());
    EXPECT_EQ(received_mass_outliers(plan, 0.2, {}), std::vector<Index>({1}));
    // Columns 3 and 4 tie; the lower index wins.
    EXPECT_EQ(received_mass_outliers(plan, 0.4, {}), std::vector<Index>({1, 3}));
    // Labeled indices are never rejected; ceil(0.25 * 4) = 1.
    EXPECT_EQ(received_mass_outliers(plan, 0.25, {1}), std::vector<Index>({3}));
    EXPECT_ANY_THROW(received_mass_outliers(plan, 1.0, {}));
    EXPECT_ANY_THROW(received_mass_outliers(plan, -0.1, {}));
}

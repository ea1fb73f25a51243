#include "kpgot/gw.hpp"
#include "kpgot/masking.hpp"

#include "instances.hpp"

#include <gtest/gtest.h>

using namespace kpgot;

TEST(GwGradient, MatchesNaiveOracle) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const auto inst = testing_support::random_instance(rng, 5, 5, 0);
        const Matrix plan = oracle::random_simplex(rng, 25).reshaped(5, 5);
        const Matrix fast = gw_gradient(plan, inst.cs, inst.ct);
        const Matrix slow = oracle::naive_gw_gradient(plan, inst.cs.values(), inst.ct.values());
        const Matrix built_in = gw_gradient(plan, inst.cs, inst.ct, GwEvaluation::Naive);
        EXPECT_LE((fast - slow).cwiseAbs().maxCoeff(), 1e-10 * slow.cwiseAbs().maxCoeff());
        EXPECT_LE((built_in - slow).cwiseAbs().maxCoeff(), 1e-10 * slow.cwiseAbs().maxCoeff());
        EXPECT_NEAR(gw_loss(plan, inst.cs, inst.ct),
                    oracle::naive_gw_loss(plan, inst.cs.values(), inst.ct.values()),
                    1e-10 * std::abs(oracle::naive_gw_loss(plan, inst.cs.values(), inst.ct.values())));
    }
}

TEST(GwGradient, ZeroPlanAndZeroCosts) {
    std::mt19937_64 rng(32);
    const auto inst = testing_support::random_instance(rng, 4, 4, 0);
    const Matrix zero = Matrix::Zero(4, 4);
    EXPECT_EQ(gw_gradient(zero, inst.cs, inst.ct),
              oracle::naive_gw_gradient(zero, inst.cs.values(), inst.ct.values()));
    const CostMatrix z = CostMatrix::intra(Matrix::Zero(4, 4));
    EXPECT_EQ(gw_gradient(Matrix::Constant(4, 4, 1.0 / 16), z, z), Matrix::Zero(4, 4));
}

TEST(GwGradient, DirectionalDerivativeMatchesFiniteDifference) {
    std::mt19937_64 rng(33);
    const auto inst = testing_support::random_instance(rng, 6, 5, 0);
    const Matrix plan = inst.p.weights() * inst.q.weights().transpose();
    const Matrix dir = testing_support::random_cost(rng, 6, 5);
    const double h = 1e-6;
    const double fd = (gw_loss(plan + h * dir, inst.cs, inst.ct) -
                       gw_loss(plan - h * dir, inst.cs, inst.ct)) /
                      (2 * h);
    const double an = frobenius(gw_gradient(plan, inst.cs, inst.ct), dir);
    EXPECT_NEAR(fd, an, 1e-5 * std::abs(an));
}

TEST(FrankWolfe, TraceNonIncreasingAndIteratesKeepKeypoints) {
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 8; ++trial) {
        const auto inst = testing_support::random_instance(rng, 9, 8, 2);
        const auto sol =
            solve_kpg_rl_gw(inst.p, inst.q, inst.cs, inst.ct, inst.kp, 0.5, SolverConfig{});
        const auto &obj = sol.trace.objective_per_iteration;
        ASSERT_GE(obj.size(), 1u);
        for (std::size_t k = 1; k < obj.size(); ++k)
            EXPECT_LE(obj[k], obj[k - 1] + 1e-12);
        for (double w : sol.trace.step_sizes) {
            EXPECT_GE(w, 0.0);
            EXPECT_LE(w, 1.0);
        }
        for (const auto &[i, j] : inst.kp.pairs())
            EXPECT_EQ(sol.plan(i, j), inst.p.weight(i));
        EXPECT_LE(sol.plan.max_marginal_error(), 1e-12);
    }
}

TEST(FrankWolfe, SingletonPolytope) {
    std::mt19937_64 rng(35);
    const auto inst = testing_support::random_instance(rng, 3, 3, 3);
    const auto sol =
        solve_kpg_rl_gw(inst.p, inst.q, inst.cs, inst.ct, inst.kp, 0.5, SolverConfig{});
    Matrix expected = Matrix::Zero(3, 3);
    for (const auto &[i, j] : inst.kp.pairs())
        expected(i, j) = inst.p.weight(i);
    EXPECT_EQ(sol.plan.values(), expected);
    EXPECT_LE(sol.plan.iterations(), 1);
    EXPECT_NEAR(sol.plan.objective(), 0.5 * gw_loss(expected, inst.cs, inst.ct) +
                                          0.5 * 0.0 + 0.0,
                1e-9 + 0.5 * std::abs(sol.plan.objective()));
}

TEST(FrankWolfe, IsomorphicSpacesReachZero) {
    std::mt19937_64 rng(36);
    const Matrix pts = oracle::random_points(rng, 10, 2);
    const auto p = make_uniform_distribution(pts);
    // Target: rotated and permuted copy.
    std::vector<Index> perm(10);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix rot(2, 2);
    rot << 0.6, -0.8, 0.8, 0.6;
    Matrix tp(10, 2);
    for (Index i = 0; i < 10; ++i)
        tp.row(perm[static_cast<std::size_t>(i)]) = pts.row(i) * rot.transpose();
    const auto q = make_uniform_distribution(tp);
    const auto sol = solve_kpg_rl_gw(p, q, intra_cost(p), intra_cost(q), KeypointPairing{}, 1.0,
                                     SolverConfig{});
    EXPECT_LE(sol.plan.objective(), 1e-6);
    // Known-optimal certificate: the true correspondence has zero distortion.
    Matrix truth = Matrix::Zero(10, 10);
    for (Index i = 0; i < 10; ++i)
        truth(i, perm[static_cast<std::size_t>(i)]) = 0.1;
    EXPECT_LE(gw_loss(truth, intra_cost(p), intra_cost(q)), 1e-12);
}

TEST(FrankWolfe, InitialPlanIsFeasible) {
    std::mt19937_64 rng(37);
    const auto inst = testing_support::random_instance(rng, 7, 9, 3);
    const Matrix init = masked_independent_plan(inst.p.weights(), inst.q.weights(), inst.kp);
    EXPECT_LE(row_marginal_error(init, inst.p.weights()), 1e-15);
    EXPECT_LE(col_marginal_error(init, inst.q.weights()), 1e-15);
    const MaskMatrix mask = build_mask(7, 9, inst.kp);
    EXPECT_EQ(init.cwiseProduct(Matrix::Ones(7, 9) - mask.values()), Matrix::Zero(7, 9));
}

TEST(FrankWolfe, AlphaBelowOneNeedsKeypoints) {
    std::mt19937_64 rng(38);
    const auto inst = testing_support::random_instance(rng, 4, 4, 0);
    EXPECT_ANY_THROW(
        solve_kpg_rl_gw(inst.p, inst.q, inst.cs, inst.ct, KeypointPairing{}, 0.5, SolverConfig{}));
}

#include "kpgot/exact.hpp"
#include "kpgot/masking.hpp"
#include "kpgot/partial.hpp"
#include "kpgot/relation.hpp"

#include "instances.hpp"

#include <gtest/gtest.h>

using namespace kpgot;

namespace {

ErrorCode code_of(const std::function<void()> &f) {
    try {
        f();
    } catch (const Error &e) {
        return e.code();
    }
    return ErrorCode::Io;
}

} // namespace

TEST(Augment, PlainConstruction) {
    const Vector p = Vector::Constant(2, 0.5);
    const auto aug = augment(p, p, CostMatrix(Matrix::Ones(2, 2)), MaskMatrix::ones(2, 2),
                             KeypointPairing{}, 0.5);
    EXPECT_EQ(aug.g_bar(2, 2), 1.0);
    EXPECT_EQ(aug.g_bar(0, 2), 0.0);
    EXPECT_EQ(aug.g_bar(2, 1), 0.0);
    EXPECT_DOUBLE_EQ(aug.p_bar(2), 0.5);
    EXPECT_DOUBLE_EQ(aug.q_bar(2), 0.5);
    EXPECT_EQ(aug.m_bar.values(), Matrix::Ones(3, 3));
}

TEST(Augment, BordersAndKeypoints) {
    Vector p(3), q(3);
    p << 0.2, 0.5, 0.3;
    q << 0.4, 0.2, 0.4;
    const KeypointPairing kp({{0, 1}});
    const auto aug = augment(p, q, CostMatrix(Matrix::Ones(3, 3)), build_mask(3, 3, kp), kp, 0.6,
                             {0.25, 2.0});
    EXPECT_EQ(aug.m_bar.values()(0, 3), 0.0);
    EXPECT_EQ(aug.m_bar.values()(3, 1), 0.0);
    EXPECT_EQ(aug.m_bar.values()(1, 3), 1.0);
    EXPECT_EQ(aug.m_bar.values()(3, 3), 1.0);
    EXPECT_EQ(aug.g_bar(3, 3), 2.5);
    EXPECT_EQ(aug.g_bar(2, 3), 0.25);
}

TEST(Augment, Errors) {
    const Vector p = Vector::Constant(2, 0.5);
    const KeypointPairing kp({{0, 0}});
    const MaskMatrix mask = build_mask(2, 2, kp);
    const CostMatrix g(Matrix::Ones(2, 2));
    EXPECT_EQ(code_of([&] { augment(p, p, g, mask, kp, 0.5); }),
              ErrorCode::KeypointMassExceedsBudget);
    EXPECT_EQ(code_of([&] { augment(p, p, g, mask, kp, 1.5); }), ErrorCode::InvalidMassBudget);
    EXPECT_EQ(code_of([&] { augment(p, p, g, mask, kp, 0.8, {0.0, 0.0}); }),
              ErrorCode::NonPositiveA);
}

TEST(Partial, FullBudgetReducesToBalanced) {
    std::mt19937_64 rng(41);
    const auto inst = testing_support::random_instance(rng, 6, 6, 0);
    const auto full = solve_partial(inst.p.weights(), inst.q.weights(), inst.cross,
                                    KeypointPairing{}, 1.0, SolverConfig{}, Backend::LP);
    const auto bal = lp_masked(inst.p, inst.q, inst.cross, MaskMatrix::ones(6, 6));
    EXPECT_NEAR(full.objective(), bal.objective(), 1e-12);
}

TEST(Partial, MatchesDirectInequalityLp) {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const auto inst = testing_support::random_instance(rng, 4, 4, 1);
        const auto [ki, kj] = inst.kp.pairs()[0];
        const double s = std::max(0.5, inst.p.weight(ki) + 0.05);
        const GuidingMatrix g = guiding_from_intra(inst.cs, inst.ct, inst.kp, 0.1, Divergence::JS);
        const auto t = solve_partial(inst.p.weights(), inst.q.weights(), g, inst.kp, s,
                                     SolverConfig{}, Backend::LP);
        const auto ref = oracle::partial_lp(inst.p.weights(), inst.q.weights(), g.values(),
                                            build_mask(4, 4, inst.kp).values(), s, {ki}, {kj});
        ASSERT_TRUE(ref.feasible);
        EXPECT_NEAR(t.objective(), ref.objective, 1e-9);
        EXPECT_NEAR(t.total_mass(), s, 1e-9);
        EXPECT_EQ(t(ki, kj), inst.p.weight(ki));
    }
}

TEST(Partial, EntropicBackendWithinBudget) {
    std::mt19937_64 rng(43);
    const auto inst = testing_support::random_instance(rng, 6, 5, 1);
    SolverConfig cfg;
    cfg.set_epsilon(0.01);
    const auto t = solve_partial_kpg_rl(inst.p, inst.q, inst.cs, inst.ct, inst.kp, 0.6, cfg,
                                        Backend::Sinkhorn);
    EXPECT_NEAR(t.total_mass(), 0.6, 1e-8);
    const auto [i, j] = inst.kp.pairs()[0];
    EXPECT_NEAR(t.values().row(i).sum(), inst.p.weight(i), 1e-12);
}

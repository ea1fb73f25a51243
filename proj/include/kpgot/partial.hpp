#pragma once

#include "kpgot/core.hpp"
#include "kpgot/exact.hpp"

namespace kpgot {

/// Balanced problem equivalent to transporting only `s` units of mass.
///
/// One dummy point is appended on each side: the source dummy carries
/// ‖q‖₁ - s and the target dummy ‖p‖₁ - s. Border costs are ξ, the corner
/// costs 2ξ + A, and keypoint rows/columns may not reach the dummies.
struct AugmentedProblem {
    Vector p_bar;
    Vector q_bar;
    CostMatrix g_bar;
    MaskMatrix m_bar;
    double xi = 0.0;
    double a = 1.0;
    double s = 0.0;
};

struct PartialParams {
    double xi = 0.0;
    double a = 1.0;
};

/// Throws NonPositiveA, InvalidMassBudget (s outside [0, min mass]) or
/// KeypointMassExceedsBudget (keypoint mass on either side not below s).
AugmentedProblem augment(const Vector &p, const Vector &q, const CostMatrix &g,
                         const MaskMatrix &mask, const KeypointPairing &kp, double s,
                         const PartialParams &params = {});

/// Solves the augmented problem and returns its upper-left m x n block,
/// after checking that the block lies in the partial polytope (TheoremViolation
/// otherwise). Marginal errors on the returned plan are measured against the
/// full p and q, so they include the untransported mass.
TransportPlan solve_partial(const Vector &p, const Vector &q, const CostMatrix &objective,
                            const KeypointPairing &kp, double s, const SolverConfig &cfg,
                            Backend backend, const PartialParams &params = {});

/// Partial transport guided by relation preservation.
TransportPlan solve_partial_kpg_rl(const DiscreteDistribution &p, const DiscreteDistribution &q,
                                   const CostMatrix &source_intra, const CostMatrix &target_intra,
                                   const KeypointPairing &kp, double s, const SolverConfig &cfg,
                                   Backend backend, const PartialParams &params = {});

/// Plain partial OT on a cross-domain cost (no keypoints, all-ones mask).
TransportPlan solve_partial_ot(const DiscreteDistribution &p, const DiscreteDistribution &q,
                               const CostMatrix &cost, double s, const SolverConfig &cfg,
                               Backend backend, const PartialParams &params = {});

} // namespace kpgot

#pragma once

#include "kpgot/core.hpp"

namespace kpgot {

enum class Backend { LP, Sinkhorn };

std::string to_string(Backend b);

/// Result of the transportation simplex on an arbitrary real cost.
struct LpSolution {
    Matrix plan;
    int pivots = 0;
    bool optimal = true; // false only when the pivot budget ran out
};

/// Min <plan, cost> over {plan >= 0, plan 1 = p, plan^T 1 = q, plan = 0 off
/// the mask}. Network simplex on the bipartite graph whose arcs are the
/// admissible cells; masked cells are simply absent. The entering arc is the
/// lowest-index arc with negative reduced cost, and the leaving arc keeps the
/// spanning tree strongly feasible, so degenerate pivots cannot cycle.
///
/// Zero masses are allowed. Throws Infeasible when no plan exists.
LpSolution transport_lp(const Vector &p, const Vector &q, const Matrix &cost,
                        const MaskMatrix &mask);

/// Exact masked transport plan. Objective is <plan, objective>.
TransportPlan lp_masked(const DiscreteDistribution &p, const DiscreteDistribution &q,
                        const CostMatrix &objective, const MaskMatrix &mask);

TransportPlan lp_masked(const Vector &p, const Vector &q, const CostMatrix &objective,
                        const MaskMatrix &mask);

/// Dispatch to the exact solver or to Sinkhorn (linear domain with a
/// log-domain fallback).
TransportPlan solve_masked(const Vector &p, const Vector &q, const CostMatrix &objective,
                           const MaskMatrix &mask, const SolverConfig &cfg, Backend backend);

/// Keypoint-guided transport by relation preservation: relation scores,
/// guiding matrix, mask, then the chosen backend on <M⊙π, G>.
TransportPlan solve_kpg_rl(const DiscreteDistribution &p, const DiscreteDistribution &q,
                           const CostMatrix &source_intra, const CostMatrix &target_intra,
                           const KeypointPairing &kp, const SolverConfig &cfg, Backend backend);

/// Same polytope with the blended objective alpha*C + (1-alpha)*G.
TransportPlan solve_kpg_rl_kp(const DiscreteDistribution &p, const DiscreteDistribution &q,
                              const CostMatrix &cross_cost, const CostMatrix &source_intra,
                              const CostMatrix &target_intra, const KeypointPairing &kp,
                              double alpha, const SolverConfig &cfg, Backend backend);

} // namespace kpgot

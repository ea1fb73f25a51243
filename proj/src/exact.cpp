#include "kpgot/exact.hpp"

#include "kpgot/masking.hpp"
#include "kpgot/relation.hpp"
#include "kpgot/sinkhorn.hpp"

namespace kpgot {

std::string to_string(Backend b) { return b == Backend::LP ? "lp" : "sinkhorn"; }

TransportPlan lp_masked(const Vector &p, const Vector &q, const CostMatrix &objective,
                        const MaskMatrix &mask) {
    LpSolution sol = transport_lp(p, q, objective.values(), mask);
    pin_forced_cells(sol.plan, p, q, mask);
    TransportPlan::Meta meta;
    meta.objective = frobenius(sol.plan, objective.values());
    meta.tag = SolverTag::NetworkSimplex;
    meta.iterations = sol.pivots;
    meta.converged = sol.optimal;
    return TransportPlan::make(std::move(sol.plan), p, q, &mask, meta);
}

TransportPlan lp_masked(const DiscreteDistribution &p, const DiscreteDistribution &q,
                        const CostMatrix &objective, const MaskMatrix &mask) {
    return lp_masked(p.weights(), q.weights(), objective, mask);
}

TransportPlan solve_masked(const Vector &p, const Vector &q, const CostMatrix &objective,
                           const MaskMatrix &mask, const SolverConfig &cfg, Backend backend) {
    if (backend == Backend::LP)
        return lp_masked(p, q, objective, mask);
    return sinkhorn_auto(p, q, objective, mask, cfg);
}

TransportPlan solve_kpg_rl(const DiscreteDistribution &p, const DiscreteDistribution &q,
                           const CostMatrix &source_intra, const CostMatrix &target_intra,
                           const KeypointPairing &kp, const SolverConfig &cfg, Backend backend) {
    require(source_intra.rows() == p.count() && target_intra.rows() == q.count(),
            ErrorCode::ShapeMismatch, "intra-domain costs do not match the distributions");
    require(!kp.empty(), ErrorCode::EmptyKeypoints, "KPG-RL needs at least one keypoint pair");
    const MaskMatrix mask = build_mask(p.count(), q.count(), kp);
    check_masked_feasibility(p, q, mask, kp);
    const GuidingMatrix g =
        guiding_from_intra(source_intra, target_intra, kp, cfg.rho(), cfg.divergence());
    return solve_masked(p.weights(), q.weights(), g, mask, cfg, backend);
}

TransportPlan solve_kpg_rl_kp(const DiscreteDistribution &p, const DiscreteDistribution &q,
                              const CostMatrix &cross_cost, const CostMatrix &source_intra,
                              const CostMatrix &target_intra, const KeypointPairing &kp,
                              double alpha, const SolverConfig &cfg, Backend backend) {
    require(alpha > 0.0 && alpha < 1.0, ErrorCode::InvalidConfig, "alpha must lie in (0,1)");
    require(cross_cost.rows() == p.count() && cross_cost.cols() == q.count(),
            ErrorCode::DimensionMismatch, "cross-domain cost does not match the distributions");
    require(source_intra.rows() == p.count() && target_intra.rows() == q.count(),
            ErrorCode::ShapeMismatch, "intra-domain costs do not match the distributions");
    require(!kp.empty(), ErrorCode::EmptyKeypoints, "KPG-RL-KP needs at least one keypoint pair");
    const MaskMatrix mask = build_mask(p.count(), q.count(), kp);
    check_masked_feasibility(p, q, mask, kp);
    const GuidingMatrix g =
        guiding_from_intra(source_intra, target_intra, kp, cfg.rho(), cfg.divergence());
    const CostMatrix blended(alpha * cross_cost.values() + (1.0 - alpha) * g.values());
    return solve_masked(p.weights(), q.weights(), blended, mask, cfg, backend);
}

} // namespace kpgot

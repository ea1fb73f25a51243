#pragma once

#include "kpgot/core.hpp"
#include "kpgot/exact.hpp"

#include <vector>

namespace kpgot {

struct FrankWolfeTrace {
    /// Blended objective at the initial plan and after every iteration.
    std::vector<double> objective_per_iteration;
    /// Weight ω kept on the current iterate: next = ω·current + (1-ω)·vertex.
    std::vector<double> step_sizes;
    bool converged = false;
};

struct GwSolution {
    TransportPlan plan;
    FrankWolfeTrace trace;
};

enum class GwEvaluation { Factorized, Naive };

/// Gradient of the squared-loss distortion
///   L(π) = Σ_{i,k,j,l} π_ij π_kl (Cs_ik - Ct_jl)^2
/// i.e. 2 Σ_kl (Cs_ik - Ct_jl)^2 π_kl. The factorized path expands the
/// square into Cs²·r 1ᵀ + 1 (Ct²·c)ᵀ - 2 Cs π Ctᵀ with r, c the plan's own
/// row and column sums, which is O(m²n + mn²). Naive is the O(m²n²) sum.
Matrix gw_gradient(const Matrix &plan, const CostMatrix &source_intra,
                   const CostMatrix &target_intra,
                   GwEvaluation mode = GwEvaluation::Factorized);

inline Matrix gw_gradient(const TransportPlan &plan, const CostMatrix &source_intra,
                          const CostMatrix &target_intra,
                          GwEvaluation mode = GwEvaluation::Factorized) {
    return gw_gradient(plan.values(), source_intra, target_intra, mode);
}

/// L(π); equal to ½<π, ∇L(π)> since L is a quadratic form.
double gw_loss(const Matrix &plan, const CostMatrix &source_intra, const CostMatrix &target_intra,
               GwEvaluation mode = GwEvaluation::Factorized);

/// Frank-Wolfe on alpha·L_gw(M⊙π) + (1-alpha)·<M⊙π, G> over the masked
/// polytope. alpha = 1 with an empty pairing is plain Gromov-Wasserstein.
///
/// Starts from p qᵀ restricted to the mask and rescaled onto the marginals,
/// takes the linear minimizer from `lmo_backend`, and picks the step by the
/// closed-form minimizer of the quadratic segment objective. Stops when the
/// relative decrease falls below cfg.tolerance() or the FW gap vanishes.
GwSolution solve_kpg_rl_gw(const DiscreteDistribution &p, const DiscreteDistribution &q,
                           const CostMatrix &source_intra, const CostMatrix &target_intra,
                           const KeypointPairing &kp, double alpha, const SolverConfig &cfg,
                           Backend lmo_backend = Backend::LP);

/// Feasible starting plan: M⊙(p qᵀ) with the free block rescaled so both
/// marginals hold exactly (keypoint cells carry p_i).
Matrix masked_independent_plan(const Vector &p, const Vector &q, const KeypointPairing &kp);

} // namespace kpgot

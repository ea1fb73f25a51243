#pragma once

#include "kpgot/core.hpp"

namespace kpgot {

/// Dual potentials over the support points.
struct PotentialPair {
    Vector phi;
    Vector psi;
    double dual_objective = 0.0;
    double gradient_norm = 0.0; // max-norm of the dual gradient at (phi, psi)
    int iterations = 0;
    bool converged = false;
};

/// Σφp + Σψq − (1/4ε)·Σ M(φ_i + ψ_j − G_ij)₊² p_i q_j.
double dual_objective(const Vector &phi, const Vector &psi, const Vector &p, const Vector &q,
                      const Matrix &g, const MaskMatrix &mask, double epsilon);

/// Gradient of the dual maximand, stacked as (dφ, dψ).
Vector dual_gradient(const Vector &phi, const Vector &psi, const Vector &p, const Vector &q,
                     const Matrix &g, const MaskMatrix &mask, double epsilon);

/// Maximizes the concave dual from φ = ψ = 0 until the gradient max-norm
/// drops below cfg.tolerance(). Each step solves the (regularized) Newton
/// system of the active hinge set and backtracks until the Armijo condition
/// holds. Not converging is reported through `converged`, never thrown.
PotentialPair solve_dual(const Vector &p, const Vector &q, const CostMatrix &g,
                         const MaskMatrix &mask, double epsilon, const SolverConfig &cfg);

/// plan_ij = (1/2ε)·M_ij·(φ_i + ψ_j − G_ij)₊·p_i·q_j. Cells that are the only
/// admissible entry of their row or column (keypoint cells) are set to the
/// marginal they must carry; other marginal errors are left as recovered.
TransportPlan recover_plan(const PotentialPair &pot, const Vector &p, const Vector &q,
                           const CostMatrix &g, const MaskMatrix &mask, double epsilon);

/// <M⊙π, G> + ε·Σ (M_ij π_ij)² / (p_i q_j).
double primal_l2_objective(const Matrix &plan, const Vector &p, const Vector &q,
                           const Matrix &g, const MaskMatrix &mask, double epsilon);

} // namespace kpgot

#pragma once

#include "kpgot/core.hpp"

#include <vector>

namespace kpgot {

/// Entropy-regularized transport over the masked polytope.
///
/// The plan is diag(u) K diag(v) with K = M ⊙ exp(-objective / ε); u and v
/// are alternately rescaled to fit the row and column marginals. Iteration
/// stops once the max-norm row violation (columns are exact after each
/// v-update) drops below cfg.tolerance(), or after cfg.max_iterations()
/// sweeps, in which case the plan is returned with converged() == false.
///
/// Throws NumericalUnderflow when an admissible entry of K underflows or the
/// scalings overflow; sinkhorn_masked_log handles those regimes.
TransportPlan sinkhorn_masked(const DiscreteDistribution &p, const DiscreteDistribution &q,
                              const CostMatrix &objective, const MaskMatrix &mask,
                              const SolverConfig &cfg,
                              std::vector<double> *error_trace = nullptr);

/// Same contract, iterated on log-potentials f = ε log u, g = ε log v.
/// Masked cells are -inf in the log-kernel.
TransportPlan sinkhorn_masked_log(const DiscreteDistribution &p, const DiscreteDistribution &q,
                                  const CostMatrix &objective, const MaskMatrix &mask,
                                  const SolverConfig &cfg,
                                  std::vector<double> *error_trace = nullptr);

/// Mass-vector forms. Zero entries are allowed (dummy points of an
/// augmented partial problem); the totals must agree.
TransportPlan sinkhorn_masked(const Vector &p, const Vector &q, const CostMatrix &objective,
                              const MaskMatrix &mask, const SolverConfig &cfg,
                              std::vector<double> *error_trace = nullptr);
TransportPlan sinkhorn_masked_log(const Vector &p, const Vector &q, const CostMatrix &objective,
                                  const MaskMatrix &mask, const SolverConfig &cfg,
                                  std::vector<double> *error_trace = nullptr);

/// Linear-domain solve, retried in the log domain on NumericalUnderflow.
TransportPlan sinkhorn_auto(const Vector &p, const Vector &q, const CostMatrix &objective,
                            const MaskMatrix &mask, const SolverConfig &cfg);

} // namespace kpgot

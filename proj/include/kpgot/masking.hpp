#pragma once

#include "kpgot/core.hpp"

namespace kpgot {

/// Mask preserving the matching of keypoint pairs: a keypoint row (column)
/// has a single admissible cell, its partner; every other cell is admissible.
MaskMatrix build_mask(Index m, Index n, const KeypointPairing &kp);

struct FeasibilityReport {
    double max_keypoint_mass_gap = 0.0;
    double free_source_mass = 0.0; // mass on rows outside the keypoint set
    double free_target_mass = 0.0;
};

/// Checks p_i == q_j on every pair and that the masked polytope is nonempty.
/// Throws MassMismatchAtKeypoint or InfeasibleMask.
FeasibilityReport check_masked_feasibility(const DiscreteDistribution &p,
                                           const DiscreteDistribution &q,
                                           const MaskMatrix &mask, const KeypointPairing &kp);

/// Overwrites every cell that is the only admissible one in its row (with
/// p_i) or its column (with q_j). The masked polytope admits no other value
/// there, so this only removes rounding left by iterative updates.
void pin_forced_cells(Matrix &plan, const Vector &p, const Vector &q, const MaskMatrix &mask);

} // namespace kpgot
